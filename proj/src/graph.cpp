#include "bigat/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "bigat/errors.hpp"
#include "bigat/rng.hpp"

namespace bigat {

SpatialGraph build_from_edges(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& raw_edges) {
    std::set<std::pair<std::size_t, std::size_t>> dedup;
    for (const auto& [u, v] : raw_edges) {
        if (u >= n || v >= n) {
            throw DataError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                            ") out of range for n=" + std::to_string(n));
        }
        if (u == v) {
            throw DataError("self-loop (" + std::to_string(u) + "," + std::to_string(v) +
                            ") not allowed; self-attention is added by the model");
        }
        dedup.insert({std::min(u, v), std::max(u, v)});
    }
    SpatialGraph g;
    g.n = n;
    g.edges.assign(dedup.begin(), dedup.end());
    g.neighbors.resize(n);
    for (const auto& [u, v] : g.edges) {
        g.neighbors[u].push_back(v);
        g.neighbors[v].push_back(u);
    }
    for (auto& nb : g.neighbors) std::sort(nb.begin(), nb.end());
    return g;
}

SpatialGraph grid_graph(std::size_t rows, std::size_t cols) {
    if (rows < 1 || cols < 1) throw ConfigError("grid_graph: rows and cols must be >= 1");
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t id = r * cols + c;
            if (c + 1 < cols) edges.push_back({id, id + 1});
            if (r + 1 < rows) edges.push_back({id, id + cols});
        }
    }
    SpatialGraph g = build_from_edges(rows * cols, edges);
    std::vector<std::pair<double, double>> coords(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            coords[r * cols + c] = {static_cast<double>(c), static_cast<double>(r)};
    g.coords = std::move(coords);
    return g;
}

namespace {

// Cross-product part of the double sum, computed over the edge list; each
// undirected edge contributes both (i,j) and (j,i).
double moran_numerator(const SpatialGraph& g, const std::vector<double>& dev) {
    double num = 0.0;
    for (const auto& [u, v] : g.edges) num += 2.0 * dev[u] * dev[v];
    return num;
}

void check_moran_pre(const SpatialGraph& g, const std::vector<double>& x) {
    if (x.size() != g.n) throw DimensionError("morans_i: value vector length != node count");
    if (g.n < 3) throw DataError("morans_i: need at least 3 nodes");
    if (g.edges.empty()) throw DataError("morans_i: edgeless graph");
}

}  // namespace

double morans_i(const SpatialGraph& g, const std::vector<double>& x) {
    check_moran_pre(g, x);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) throw DataError("morans_i: degenerate field (zero variance)");
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(g.n);
    std::vector<double> dev(g.n);
    double denom = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        dev[i] = x[i] - mean;
        denom += dev[i] * dev[i];
    }
    if (denom == 0.0) throw DataError("morans_i: degenerate field (zero variance)");
    const double w_total = 2.0 * static_cast<double>(g.edges.size());
    return (static_cast<double>(g.n) / w_total) * moran_numerator(g, dev) / denom;
}

MoranResult morans_i_significance(const SpatialGraph& g, const std::vector<double>& x,
                                  std::size_t n_perms, std::uint64_t seed) {
    if (n_perms < 99) throw ConfigError("morans_i_significance: need n_perms >= 99");
    const double observed = morans_i(g, x);
    std::vector<double> perm = x;
    Rng rng(seed);
    std::size_t at_least = 0;
    for (std::size_t t = 0; t < n_perms; ++t) {
        std::shuffle(perm.begin(), perm.end(), rng);
        if (morans_i(g, perm) >= observed) ++at_least;
    }
    const double p = (1.0 + static_cast<double>(at_least)) / (1.0 + static_cast<double>(n_perms));
    return {observed, p};
}

SpatialGraph load_edges_csv(const std::string& path, std::size_t n) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open edge file " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty edge file");
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) {
            throw DataError(path + ":" + std::to_string(lineno) + ": expected u,v");
        }
        try {
            edges.push_back({std::stoul(a), std::stoul(b)});
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": non-integer node id");
        }
    }
    return build_from_edges(n, edges);
}

void save_edges_csv(const SpatialGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write edge file " + path);
    out << "u,v\n";
    for (const auto& [u, v] : g.edges) out << u << "," << v << "\n";
}

}  // namespace bigat
