#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "bigat/cluster.hpp"
#include "bigat/dataset.hpp"
#include "bigat/errors.hpp"
#include "bigat/graph.hpp"
#include "bigat/kmeans.hpp"

using namespace bigat;

TEST_CASE("label_duration thresholds and monotonicity") {
    CHECK(label_duration(1.5) == DurationClass::Short);
    CHECK(label_duration(2.0) == DurationClass::Medium);  // boundary goes to medium
    CHECK(label_duration(6.0) == DurationClass::Medium);
    CHECK(label_duration(7.0) == DurationClass::Long);
    CHECK(label_duration(0.0) == DurationClass::Short);
    CHECK_THROWS_AS(label_duration(-1.0), DataError);

    double prev = -1.0;
    for (double d = 0.0; d <= 12.0; d += 0.01) {
        const double c = static_cast<double>(label_duration(d));
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("load_event minimal file and validation errors") {
    const std::string nodes = "nodes_min.csv", edges = "edges_min.csv";
    {
        std::ofstream n(nodes);
        n << "node_id,name,x,y,peak_customers_out,population,area,svi_theme1,svi_theme2,"
             "svi_theme3,svi_theme4,swath_none_frac,swath_34_frac,swath_50_frac,swath_64_frac,"
             "duration_days\n";
        n << "0,a,0,0,100,1000,10,0.1,0.2,0.3,0.4,0.25,0.25,0.25,0.25,1.5\n";
        n << "1,b,1,0,200,2000,20,0.5,0.6,0.7,0.8,1,0,0,0,\n";
        std::ofstream e(edges);
        e << "u,v\n0,1\n";
    }
    const EventDataset ds = load_event(nodes, edges);
    CHECK(ds.n() == 2);
    CHECK(ds.is_labeled(0));
    CHECK_FALSE(ds.is_labeled(1));  // empty duration cell -> unlabeled
    CHECK(ds.labels()[0] == 0);
    CHECK(ds.labels()[1] == -1);
    CHECK(ds.graph.edge_count() == 1);

    // simplex violation reported with a row number
    {
        std::ofstream n(nodes, std::ios::trunc);
        n << "node_id,name,x,y,peak_customers_out,population,area,svi_theme1,svi_theme2,"
             "svi_theme3,svi_theme4,swath_none_frac,swath_34_frac,swath_50_frac,swath_64_frac,"
             "duration_days\n";
        n << "0,a,0,0,100,1000,10,0.1,0.2,0.3,0.4,0.5,0.5,0.5,0.5,1.5\n";
    }
    CHECK_THROWS_WITH_AS(load_event(nodes, edges), doctest::Contains(":2"), DataError);

    // missing column
    {
        std::ofstream n(nodes, std::ios::trunc);
        n << "node_id,name,x,y\n0,a,0,0\n";
    }
    CHECK_THROWS_AS(load_event(nodes, edges), DataError);
    std::remove(nodes.c_str());
    std::remove(edges.c_str());
}

TEST_CASE("save_event then load_event round-trips bitwise") {
    SynthConfig cfg;
    cfg.seed = 31;
    const EventDataset ds = synth_event(cfg);
    const std::string nodes = "nodes_rt.csv", edges = "edges_rt.csv";
    save_event(ds, nodes, edges);
    const EventDataset back = load_event(nodes, edges);
    CHECK(back.features == ds.features);
    CHECK(back.duration_days == ds.duration_days);
    CHECK(back.planted_cluster == ds.planted_cluster);
    CHECK(back.graph.edges == ds.graph.edges);
    CHECK(*back.graph.coords == *ds.graph.coords);

    // writing the loaded dataset again produces identical bytes
    const std::string nodes2 = "nodes_rt2.csv", edges2 = "edges_rt2.csv";
    save_event(back, nodes2, edges2);
    auto slurp = [](const std::string& p) {
        std::ifstream in(p);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(slurp(nodes) == slurp(nodes2));
    CHECK(slurp(edges) == slurp(edges2));
    for (const auto& p : {nodes, edges, nodes2, edges2}) std::remove(p.c_str());
}

TEST_CASE("standardize: training-column statistics, std floor, single use") {
    SynthConfig cfg;
    const EventDataset ds = synth_event(cfg);
    std::vector<bool> mask(ds.n(), false);
    for (std::size_t v = 0; v < ds.n(); v += 2) mask[v] = true;

    Standardizer rec = fit_standardizer(ds, mask);
    const Matrix x = rec.apply(ds.features);
    std::size_t n_train = 0;
    for (bool b : mask)
        if (b) ++n_train;
    for (std::size_t j = 0; j < kFeatureDim; ++j) {
        double mean = 0.0, var = 0.0;
        for (std::size_t v = 0; v < ds.n(); ++v)
            if (mask[v]) mean += x(v, j);
        mean /= static_cast<double>(n_train);
        for (std::size_t v = 0; v < ds.n(); ++v)
            if (mask[v]) var += (x(v, j) - mean) * (x(v, j) - mean);
        const double sd = std::sqrt(var / static_cast<double>(n_train));
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
        if (sd > 1e-6) CHECK(sd == doctest::Approx(1.0).epsilon(1e-6));
    }

    // transform record is single-use
    CHECK_THROWS_AS(rec.apply(ds.features), ConfigError);

    // constant feature on training nodes maps to zeros there
    EventDataset flat = ds;
    for (std::size_t v = 0; v < ds.n(); ++v) flat.features(v, FeatureSchema::kSvi1) = 0.7;
    Standardizer rec2 = fit_standardizer(flat, mask);
    const Matrix y = rec2.apply(flat.features);
    for (std::size_t v = 0; v < ds.n(); ++v) CHECK(y(v, FeatureSchema::kSvi1) == 0.0);
}

TEST_CASE("synth_event shape, determinism, simplex") {
    SynthConfig cfg;
    const EventDataset a = synth_event(cfg);
    CHECK(a.n() == 400);
    CHECK(a.features.cols == kFeatureDim);
    CHECK(a.labeled_nodes().size() == a.n());

    const EventDataset b = synth_event(cfg);
    CHECK(a.features == b.features);
    CHECK(a.duration_days == b.duration_days);

    SynthConfig other = cfg;
    other.seed = 999;
    const EventDataset c = synth_event(other);
    CHECK(c.n() == a.n());
    CHECK(c.graph.edges == a.graph.edges);
    CHECK(c.features != a.features);

    for (std::size_t v = 0; v < a.n(); ++v) {
        double sum = 0.0;
        for (std::size_t j = FeatureSchema::kSwathNone; j <= FeatureSchema::kSwath64; ++j) {
            CHECK(a.features(v, j) >= 0.0);
            CHECK(a.features(v, j) <= 1.0);
            sum += a.features(v, j);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("synth_event covers all three classes with margin for five folds") {
    SynthConfig cfg;
    const EventDataset ds = synth_event(cfg);
    std::vector<std::size_t> counts(3, 0);
    for (int l : ds.labels()) ++counts[static_cast<std::size_t>(l)];
    for (std::size_t c = 0; c < 3; ++c) CHECK(counts[c] >= 10);
}

TEST_CASE("synth_event plants positive spatial autocorrelation") {
    SynthConfig cfg;
    const EventDataset ds = synth_event(cfg);
    std::vector<double> log_dur(ds.n());
    for (std::size_t v = 0; v < ds.n(); ++v) log_dur[v] = std::log(*ds.duration_days[v]);
    const auto res = morans_i_significance(ds.graph, log_dur, 999, 11);
    CHECK(res.statistic > 0.0);
    CHECK(res.p_value < 0.01);
}

TEST_CASE("synth_event planted clusters recoverable by kmeans") {
    SynthConfig cfg;
    const EventDataset ds = synth_event(cfg);
    const auto nodes = ds.labeled_nodes();
    const auto pts = severity_features(ds, nodes);
    const auto km = kmeans(pts, 2, 10, 100, 3);
    std::vector<std::size_t> planted;
    for (std::size_t v : nodes) planted.push_back(*ds.planted_cluster[v]);
    CHECK(adjusted_rand_index(km.assignments, planted) >= 0.9);
}

TEST_CASE("synth_event config validation") {
    SynthConfig bad;
    bad.track.clear();
    CHECK_THROWS_AS(synth_event(bad), ConfigError);

    SynthConfig radii;
    radii.r64 = 3.0;
    radii.r50 = 2.0;
    CHECK_THROWS_AS(synth_event(radii), ConfigError);
}
