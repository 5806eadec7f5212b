#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bigat {

// Undirected county-adjacency graph. Immutable after construction.
struct SpatialGraph {
    std::size_t n = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // u < v, sorted
    std::vector<std::vector<std::size_t>> neighbors;         // sorted ascending
    std::optional<std::vector<std::pair<double, double>>> coords;

    std::size_t edge_count() const { return edges.size(); }
};

SpatialGraph build_from_edges(std::size_t n,
                              const std::vector<std::pair<std::size_t, std::size_t>>& raw_edges);

// 4-neighborhood lattice, row-major ids, coords (col, row).
SpatialGraph grid_graph(std::size_t rows, std::size_t cols);

// Global Moran's I with binary weights w_ij = 1 iff (i,j) in E.
double morans_i(const SpatialGraph& g, const std::vector<double>& x);

struct MoranResult {
    double statistic;
    double p_value;  // one-sided permutation p, upper tail
};

MoranResult morans_i_significance(const SpatialGraph& g, const std::vector<double>& x,
                                  std::size_t n_perms, std::uint64_t seed);

SpatialGraph load_edges_csv(const std::string& path, std::size_t n);
void save_edges_csv(const SpatialGraph& g, const std::string& path);

}  // namespace bigat
