#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "bigat/cluster.hpp"
#include "bigat/dataset.hpp"
#include "bigat/errors.hpp"
#include "bigat/kmeans.hpp"

using namespace bigat;

namespace {

// brute force over all nonempty 2-partitions of 1-D points
double optimal_two_partition_inertia(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t mask = 1; mask + 1 < (1u << n); ++mask) {
        double s0 = 0, s1 = 0;
        std::size_t c0 = 0, c1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                s0 += xs[i];
                ++c0;
            } else {
                s1 += xs[i];
                ++c1;
            }
        }
        const double m0 = s0 / static_cast<double>(c0), m1 = s1 / static_cast<double>(c1);
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = (mask & (1u << i)) ? m0 : m1;
            inertia += (xs[i] - m) * (xs[i] - m);
        }
        best = std::min(best, inertia);
    }
    return best;
}

std::vector<Point> to_points(const std::vector<double>& xs) {
    std::vector<Point> pts;
    for (double x : xs) pts.push_back({x});
    return pts;
}

}  // namespace

TEST_CASE("kmeans separates well-split pairs") {
    const auto res = kmeans(to_points({0.0, 0.1, 10.0, 10.1}), 2, 10, 100, 1);
    CHECK(res.inertia == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(res.assignments[0] == res.assignments[1]);
    CHECK(res.assignments[2] == res.assignments[3]);
    CHECK(res.assignments[0] != res.assignments[2]);
    std::vector<double> cents = {res.centroids[0][0], res.centroids[1][0]};
    std::sort(cents.begin(), cents.end());
    CHECK(cents[0] == doctest::Approx(0.05));
    CHECK(cents[1] == doctest::Approx(10.05));
}

TEST_CASE("kmeans finds the optimal split of [0,1,2,9,10]") {
    const auto res = kmeans(to_points({0, 1, 2, 9, 10}), 2, 10, 100, 3);
    CHECK(res.inertia == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(res.assignments[0] == res.assignments[1]);
    CHECK(res.assignments[1] == res.assignments[2]);
    CHECK(res.assignments[3] == res.assignments[4]);
}

TEST_CASE("kmeans degenerate identical points") {
    const auto res = kmeans(to_points({3.0, 3.0, 3.0, 3.0}), 2, 5, 100, 9);
    CHECK(res.inertia == 0.0);
}

TEST_CASE("kmeans validation") {
    CHECK_THROWS_AS(kmeans(to_points({1.0}), 2, 1, 10, 0), DataError);
    CHECK_THROWS_AS(kmeans({{std::numeric_limits<double>::quiet_NaN()}, {1.0}}, 2, 1, 10, 0),
                    DataError);
}

TEST_CASE("kmeans matches brute-force optimal 2-partition on 1-D instances") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_int_distribution<std::size_t> nd(2, 8);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> xs(nd(rng));
        for (double& x : xs) x = u(rng);
        const auto res = kmeans(to_points(xs), 2, 10, 200, 1000 + trial);
        CHECK(res.inertia == doctest::Approx(optimal_two_partition_inertia(xs)).epsilon(1e-9));
    }
}

TEST_CASE("kmeans deterministic in seed") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Point> pts(40, Point(2));
    for (auto& p : pts)
        for (double& v : p) v = u(rng);
    const auto a = kmeans(pts, 2, 10, 100, 555);
    const auto b = kmeans(pts, 2, 10, 100, 555);
    CHECK(a.assignments == b.assignments);
    CHECK(a.inertia == b.inertia);
}

TEST_CASE("adjusted_rand_index basics") {
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 1, 0, 1}) < 0.1);
}

TEST_CASE("severity_features recipe") {
    SynthConfig cfg;
    EventDataset ds = synth_event(cfg);
    // fully inside the 64-kt band -> raw severity 3; outside all -> 0
    std::size_t inside = ds.n(), outside = ds.n();
    for (std::size_t v = 0; v < ds.n(); ++v) {
        if (ds.features(v, FeatureSchema::kSwath64) == 1.0) inside = v;
        if (ds.features(v, FeatureSchema::kSwathNone) == 1.0) outside = v;
    }
    REQUIRE(inside < ds.n());
    REQUIRE(outside < ds.n());
    const double sev_in = 1.0 * ds.features(inside, FeatureSchema::kSwath34) +
                          2.0 * ds.features(inside, FeatureSchema::kSwath50) +
                          3.0 * ds.features(inside, FeatureSchema::kSwath64);
    CHECK(sev_in == doctest::Approx(3.0));
    const double sev_out = ds.features(outside, FeatureSchema::kSwath34) +
                           ds.features(outside, FeatureSchema::kSwath50) +
                           ds.features(outside, FeatureSchema::kSwath64);
    CHECK(sev_out == 0.0);

    std::vector<std::size_t> all = ds.labeled_nodes();
    const auto pts = severity_features(ds, all);
    CHECK(pts.size() == all.size());
    // z-scored: mean ~0
    for (std::size_t j = 0; j < 2; ++j) {
        double mean = 0.0;
        for (const auto& p : pts) mean += p[j];
        CHECK(mean / static_cast<double>(pts.size()) == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("severity_features rejects unlabeled nodes") {
    SynthConfig cfg;
    EventDataset ds = synth_event(cfg);
    ds.duration_days[5].reset();
    CHECK_THROWS_AS(severity_features(ds, {5}), DataError);
}

TEST_CASE("assign_clusters canonical ordering and invariance") {
    KmeansResult r;
    r.assignments = {0, 0, 1, 1};
    r.centroids = {{0.9, 0.5}, {-0.9, -0.5}};
    std::vector<std::size_t> nodes = {0, 1, 2, 3};
    const auto a = assign_clusters(r, nodes, 4);
    CHECK(a.labels[0] == 1);  // higher-duration centroid -> cluster 1
    CHECK(a.labels[2] == 2);
    CHECK(a.source[0] == ClusterSource::Kmeans);

    // swapped centroid order gives identical final labeling
    KmeansResult r2;
    r2.assignments = {1, 1, 0, 0};
    r2.centroids = {{-0.9, -0.5}, {0.9, 0.5}};
    const auto b = assign_clusters(r2, nodes, 4);
    CHECK(a.labels == b.labels);
}

TEST_CASE("assign_clusters duration tie-break on swath severity") {
    KmeansResult r;
    r.assignments = {0, 1};
    r.centroids = {{0.0, -1.0}, {0.0, 1.0}};
    const auto a = assign_clusters(r, {0, 1}, 2);
    CHECK(a.labels[0] == 2);  // lower swath severity -> cluster 2
    CHECK(a.labels[1] == 1);
}

TEST_CASE("assign_clusters rejects k != 2") {
    KmeansResult r;
    r.assignments = {0, 1, 2};
    r.centroids = {{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}};
    CHECK_THROWS_AS(assign_clusters(r, {0, 1, 2}, 3), ConfigError);
}

TEST_CASE("planted clusters recovered from synthetic severity space") {
    SynthConfig cfg;
    const EventDataset ds = synth_event(cfg);
    const auto nodes = ds.labeled_nodes();
    const auto pts = severity_features(ds, nodes);
    const auto km = kmeans(pts, 2, 10, 100, 2024);
    const auto assigned = assign_clusters(km, nodes, ds.n());
    std::vector<std::size_t> recovered, planted;
    for (std::size_t v : nodes) {
        recovered.push_back(assigned.labels[v]);
        planted.push_back(*ds.planted_cluster[v]);
    }
    CHECK(adjusted_rand_index(recovered, planted) >= 0.9);
}
