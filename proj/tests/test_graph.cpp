#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "bigat/errors.hpp"
#include "bigat/graph.hpp"

using namespace bigat;

namespace {

// independent O(n^2) double-sum oracle over the dense adjacency matrix
double morans_i_oracle(const SpatialGraph& g, const std::vector<double>& x) {
    const std::size_t n = g.n;
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (const auto& [u, v] : g.edges) w[u][v] = w[v][u] = 1.0;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double num = 0.0, den = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        den += (x[i] - mean) * (x[i] - mean);
        for (std::size_t j = 0; j < n; ++j) {
            num += w[i][j] * (x[i] - mean) * (x[j] - mean);
            wsum += w[i][j];
        }
    }
    return static_cast<double>(n) / wsum * num / den;
}

SpatialGraph random_graph(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});  // keep an edge floor
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (u(rng) < 0.25) edges.push_back({i, j});
    return build_from_edges(n, edges);
}

}  // namespace

TEST_CASE("build_from_edges dedup and sorted neighbors") {
    const auto g = build_from_edges(3, {{0, 1}, {1, 0}, {1, 2}});
    CHECK(g.edge_count() == 2);
    CHECK(g.neighbors[1] == std::vector<std::size_t>{0, 2});
}

TEST_CASE("build_from_edges empty and validation") {
    const auto g = build_from_edges(2, {});
    CHECK(g.n == 2);
    CHECK(g.edge_count() == 0);
    CHECK_THROWS_WITH_AS(build_from_edges(3, {{0, 3}}), doctest::Contains("(0,3)"), DataError);
    CHECK_THROWS_AS(build_from_edges(3, {{1, 1}}), DataError);
}

TEST_CASE("grid_graph shapes") {
    CHECK(grid_graph(1, 1).n == 1);
    CHECK(grid_graph(1, 1).edge_count() == 0);
    CHECK(grid_graph(2, 2).edge_count() == 4);
    CHECK(grid_graph(10, 13).n == 130);
}

TEST_CASE("morans_i hand cases") {
    const auto path3 = build_from_edges(3, {{0, 1}, {1, 2}});
    CHECK(morans_i(path3, {1.0, 0.0, -1.0}) == doctest::Approx(0.0).epsilon(1e-12));

    const auto cycle4 = build_from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    CHECK(morans_i(cycle4, {1.0, -1.0, 1.0, -1.0}) == doctest::Approx(-1.0).epsilon(1e-12));

    const auto path4 = build_from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
    CHECK(morans_i(path4, {1.0, 1.0, -1.0, -1.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("morans_i matches dense oracle on random graphs") {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> nd(3, 20);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = random_graph(nd(rng), rng);
        std::vector<double> x(g.n);
        for (double& v : x) v = u(rng);
        CHECK(morans_i(g, x) == doctest::Approx(morans_i_oracle(g, x)).epsilon(1e-12));
    }
}

TEST_CASE("morans_i affine invariance") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const auto g = random_graph(12, rng);
    std::vector<double> x(g.n), y(g.n);
    for (double& v : x) v = u(rng);
    for (std::size_t i = 0; i < g.n; ++i) y[i] = -3.5 * x[i] + 7.0;
    CHECK(morans_i(g, y) == doctest::Approx(morans_i(g, x)).epsilon(1e-9));
}

TEST_CASE("morans_i preconditions") {
    const auto g = build_from_edges(3, {{0, 1}, {1, 2}});
    CHECK_THROWS_AS(morans_i(g, {2.0, 2.0, 2.0}), DataError);        // zero variance
    CHECK_THROWS_AS(morans_i(build_from_edges(3, {}), std::vector<double>{1, 2, 3}), DataError);
}

TEST_CASE("permutation test detects planted smooth field") {
    const auto g = grid_graph(10, 13);
    // smoothed noise: iid values averaged with neighbors a few times
    std::mt19937_64 rng(42);
    std::normal_distribution<double> nrm(0.0, 1.0);
    std::vector<double> x(g.n);
    for (double& v : x) v = nrm(rng);
    for (int pass = 0; pass < 3; ++pass) {
        std::vector<double> next(g.n);
        for (std::size_t v = 0; v < g.n; ++v) {
            double acc = x[v];
            for (std::size_t u : g.neighbors[v]) acc += x[u];
            next[v] = acc / static_cast<double>(1 + g.neighbors[v].size());
        }
        x = next;
    }
    const auto res = morans_i_significance(g, x, 999, 7);
    CHECK(res.statistic > 0.0);
    CHECK(res.p_value < 0.01);
}

TEST_CASE("permutation test is calibrated under the null") {
    const auto g = grid_graph(6, 6);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int above = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> x(g.n);
        for (double& v : x) v = u(rng);
        if (morans_i_significance(g, x, 199, 1000 + t).p_value > 0.05) ++above;
    }
    CHECK(above >= trials * 9 / 10);
}

TEST_CASE("permutation test deterministic in seed") {
    const auto g = grid_graph(5, 5);
    std::vector<double> x(g.n);
    for (std::size_t i = 0; i < g.n; ++i) x[i] = std::sin(static_cast<double>(i));
    const auto a = morans_i_significance(g, x, 199, 33);
    const auto b = morans_i_significance(g, x, 199, 33);
    CHECK(a.statistic == b.statistic);
    CHECK(a.p_value == b.p_value);
}

TEST_CASE("edge csv round trip") {
    const auto g = grid_graph(3, 4);
    const std::string path = "edges_test.csv";
    save_edges_csv(g, path);
    const auto g2 = load_edges_csv(path, g.n);
    CHECK(g2.edges == g.edges);
    std::remove(path.c_str());
}
