#include "bigat/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "bigat/errors.hpp"
#include "bigat/rng.hpp"

namespace bigat {

namespace {

double sq_dist(const Point& a, const Point& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

// greedy k-means++: sample a few D^2-weighted candidates per step and keep the
// one that lowers the potential most
std::vector<Point> kmeanspp_init(const std::vector<Point>& points, std::size_t k, Rng& rng) {
    std::vector<Point> centroids;
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    centroids.push_back(points[pick(rng)]);
    const std::size_t n_candidates = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
    std::vector<double> d2(points.size());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) best = std::min(best, sq_dist(points[i], c));
            d2[i] = best;
            total += best;
        }
        std::size_t chosen = pick(rng);  // fallback: all points coincide with a centroid
        if (total > 0.0) {
            double chosen_pot = std::numeric_limits<double>::infinity();
            std::uniform_real_distribution<double> u(0.0, total);
            for (std::size_t cand = 0; cand < n_candidates; ++cand) {
                double target = u(rng);
                std::size_t idx = points.size() - 1;
                for (std::size_t i = 0; i < points.size(); ++i) {
                    target -= d2[i];
                    if (target <= 0.0) {
                        idx = i;
                        break;
                    }
                }
                double pot = 0.0;
                for (std::size_t i = 0; i < points.size(); ++i)
                    pot += std::min(d2[i], sq_dist(points[i], points[idx]));
                if (pot < chosen_pot) {
                    chosen_pot = pot;
                    chosen = idx;
                }
            }
        }
        centroids.push_back(points[chosen]);
    }
    return centroids;
}

// deterministic maximin seeding: start from the point farthest from the data
// mean, then repeatedly add the point farthest from the chosen centroids
std::vector<Point> farthest_first_init(const std::vector<Point>& points, std::size_t k) {
    const std::size_t dim = points[0].size();
    Point mean(dim, 0.0);
    for (const auto& p : points)
        for (std::size_t j = 0; j < dim; ++j) mean[j] += p[j] / static_cast<double>(points.size());
    std::size_t first = 0;
    double first_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = sq_dist(points[i], mean);
        if (d > first_d) {
            first_d = d;
            first = i;
        }
    }
    std::vector<Point> centroids = {points[first]};
    while (centroids.size() < k) {
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) best = std::min(best, sq_dist(points[i], c));
            if (best > far_d) {
                far_d = best;
                far = i;
            }
        }
        centroids.push_back(points[far]);
    }
    return centroids;
}

KmeansResult lloyd_run(const std::vector<Point>& points, std::size_t k, std::size_t max_iter,
                       Rng& rng, bool maximin_init) {
    const std::size_t dim = points[0].size();
    KmeansResult res;
    res.centroids = maximin_init ? farthest_first_init(points, k) : kmeanspp_init(points, k, rng);
    res.assignments.assign(points.size(), 0);

    double prev_inertia = std::numeric_limits<double>::infinity();
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        res.iterations = iter + 1;
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = sq_dist(points[i], res.centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (res.assignments[i] != best) {
                res.assignments[i] = best;
                changed = true;
            }
            inertia += best_d;
        }
        res.inertia = inertia;
        if (inertia > prev_inertia + 1e-12) {
            throw NumericError("kmeans: inertia increased within a run");
        }
        prev_inertia = inertia;
        if (!changed && iter > 0) break;

        // update step
        std::vector<Point> sums(k, Point(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            for (std::size_t j = 0; j < dim; ++j) sums[res.assignments[i]][j] += points[i][j];
            ++counts[res.assignments[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // reseed an emptied cluster to the point farthest from its centroid
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < points.size(); ++i) {
                    const double d = sq_dist(points[i], res.centroids[c]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                res.centroids[c] = points[far];
                prev_inertia = std::numeric_limits<double>::infinity();
            } else {
                for (std::size_t j = 0; j < dim; ++j)
                    res.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
            }
        }
    }

    // final assignment against the last centroids
    double inertia = 0.0;
    std::vector<std::size_t> owned(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            const double d = sq_dist(points[i], res.centroids[c]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        res.assignments[i] = best;
        inertia += best_d;
        ++owned[best];
    }
    res.inertia = inertia;
    for (std::size_t c = 0; c < k; ++c) {
        if (owned[c] == 0) {
            // duplicate-point degenerate case: park empty centroids on a point
            res.centroids[c] = points[0];
        }
    }
    return res;
}

}  // namespace

KmeansResult kmeans(const std::vector<Point>& points, std::size_t k, std::size_t restarts,
                    std::size_t max_iter, std::uint64_t seed) {
    if (k < 1) throw ConfigError("kmeans: k must be >= 1");
    if (points.size() < k) {
        throw DataError("kmeans: " + std::to_string(points.size()) + " points < k=" +
                        std::to_string(k));
    }
    for (const auto& p : points)
        for (double v : p)
            if (!std::isfinite(v)) throw DataError("kmeans: non-finite coordinate");
    if (restarts < 1) restarts = 1;

    KmeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, r));
        KmeansResult run = lloyd_run(points, k, max_iter, rng, r == 0);
        // strict < keeps the earliest restart on ties, for determinism
        if (run.inertia < best.inertia) best = std::move(run);
    }
    return best;
}

double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    if (a.size() != b.size()) throw DimensionError("adjusted_rand_index: length mismatch");
    const double n = static_cast<double>(a.size());
    std::map<std::pair<std::size_t, std::size_t>, double> cont;
    std::map<std::size_t, double> row, col;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cont[{a[i], b[i]}] += 1.0;
        row[a[i]] += 1.0;
        col[b[i]] += 1.0;
    }
    auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, c] : cont) sum_ij += choose2(c);
    for (const auto& [key, c] : row) sum_a += choose2(c);
    for (const auto& [key, c] : col) sum_b += choose2(c);
    const double expected = sum_a * sum_b / choose2(n);
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;  // both partitions trivial
    return (sum_ij - expected) / (max_index - expected);
}

}  // namespace bigat
