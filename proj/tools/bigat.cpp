// Command-line front end: gen | analyze | cv | predict.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bigat/cluster.hpp"
#include "bigat/dataset.hpp"
#include "bigat/errors.hpp"
#include "bigat/graph.hpp"
#include "bigat/hash.hpp"
#include "bigat/kmeans.hpp"
#include "bigat/metrics.hpp"
#include "bigat/model.hpp"
#include "bigat/rng.hpp"
#include "bigat/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bigat;

namespace {

constexpr const char* kToolVersion = "1.0.0";

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

void write_manifest(const fs::path& out_dir, const std::string& subcommand, const json& args,
                    std::uint64_t seed, const std::vector<fs::path>& outputs,
                    const std::string& started) {
    json m;
    m["subcommand"] = subcommand;
    m["args"] = args;
    m["seed"] = seed;
    m["tool_version"] = kToolVersion;
    m["started_at"] = started;
    m["finished_at"] = now_iso8601();
    for (const auto& p : outputs) m["outputs"][p.filename().string()] = hash_file(p.string());
    open_out(out_dir / "manifest.json") << m.dump(2) << "\n";
}

std::string slurp_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// ---- SVG helpers -----------------------------------------------------------

void write_cluster_map_svg(const fs::path& path, const EventDataset& ds,
                           const ClusterAssignment& clusters) {
    const auto& coords = *ds.graph.coords;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& [x, y] : coords) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    const double pad = 1.0, scale = 40.0;
    const double w = (xmax - xmin + 2 * pad) * scale, h = (ymax - ymin + 2 * pad) * scale;
    auto px = [&](double x) { return (x - xmin + pad) * scale; };
    auto py = [&](double y) { return h - (y - ymin + pad) * scale; };

    auto out = open_out(path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    for (const auto& [u, v] : ds.graph.edges) {
        out << "  <line x1=\"" << px(coords[u].first) << "\" y1=\"" << py(coords[u].second)
            << "\" x2=\"" << px(coords[v].first) << "\" y2=\"" << py(coords[v].second)
            << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
    }
    for (std::size_t v = 0; v < ds.n(); ++v) {
        const char* fill = clusters.labels[v] == 1 ? "#d62728" : "#e7ba52";
        out << "  <circle cx=\"" << px(coords[v].first) << "\" cy=\"" << py(coords[v].second)
            << "\" r=\"8\" fill=\"" << fill << "\"/>\n";
    }
    out << "</svg>\n";
}

void write_metrics_svg(const fs::path& path, const CvReport& report) {
    const std::vector<std::pair<std::string, std::string>> metrics = {
        {"accuracy", "#1f77b4"}, {"macro_f1", "#ff7f0e"}, {"balanced_accuracy", "#2ca02c"}};
    const double bar_w = 28.0, gap = 12.0, group_gap = 40.0, h = 320.0, base = 280.0;
    const double group_w = metrics.size() * (bar_w + gap) + group_gap;
    const double w = 60.0 + report.variants.size() * group_w;

    auto out = open_out(path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
        << "  <line x1=\"40\" y1=\"" << base << "\" x2=\"" << (w - 10) << "\" y2=\"" << base
        << "\" stroke=\"#000000\"/>\n";
    double x = 60.0;
    for (const auto& [name, vr] : report.variants) {
        double bx = x;
        for (const auto& [metric, color] : metrics) {
            const double mean = vr.metrics.at(metric).mean;
            const double bh = std::max(mean, 0.0) * 240.0;
            out << "  <rect x=\"" << bx << "\" y=\"" << (base - bh) << "\" width=\"" << bar_w
                << "\" height=\"" << bh << "\" fill=\"" << color << "\"/>\n";
            bx += bar_w + gap;
        }
        out << "  <text x=\"" << x << "\" y=\"" << (base + 20.0)
            << "\" font-family=\"sans-serif\" font-size=\"13\">" << name << "</text>\n";
        x += group_w;
    }
    out << "</svg>\n";
}

// ---- shared pipeline pieces ------------------------------------------------

ClusterAssignment labeled_kmeans_clusters(const EventDataset& ds, std::uint64_t seed) {
    const auto nodes = ds.labeled_nodes();
    const auto pts = severity_features(ds, nodes);
    const auto km = kmeans(pts, 2, 10, 100, seed);
    return assign_clusters(km, nodes, ds.n());
}

// ---- subcommands -----------------------------------------------------------

int cmd_gen(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed) {
    const std::string started = now_iso8601();
    SynthConfig cfg;
    if (!config_path.empty()) cfg = synth_config_from_json(slurp_config(config_path));
    if (seed) cfg.seed = *seed;

    const EventDataset ds = synth_event(cfg);
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    save_event(ds, (out / "nodes.csv").string(), (out / "edges.csv").string());
    open_out(out / "meta.json") << synth_config_to_json(cfg);

    json args = {{"config", config_path}, {"out", out_dir}};
    write_manifest(out, "gen", args, cfg.seed,
                   {out / "nodes.csv", out / "edges.csv", out / "meta.json"}, started);
    std::cout << "wrote " << ds.n() << " nodes, " << ds.graph.edge_count() << " edges to "
              << out_dir << "\n";
    return 0;
}

int cmd_analyze(const std::string& data_dir, const std::string& out_dir, std::uint64_t seed) {
    const std::string started = now_iso8601();
    const fs::path in(data_dir);
    const EventDataset ds = load_event((in / "nodes.csv").string(), (in / "edges.csv").string());
    if (ds.labeled_nodes().size() != ds.n())
        throw DataError("analyze requires duration labels on every node");

    std::vector<double> log_dur(ds.n()), log_peak(ds.n());
    for (std::size_t v = 0; v < ds.n(); ++v) {
        log_dur[v] = std::log(*ds.duration_days[v] + 1.0 / 24.0);
        log_peak[v] = std::log1p(ds.features(v, FeatureSchema::kPeakCustomersOut));
    }
    const auto mi_dur = morans_i_significance(ds.graph, log_dur, 999, derive_seed(seed, 1));
    const auto mi_peak = morans_i_significance(ds.graph, log_peak, 999, derive_seed(seed, 2));
    auto star = [](const MoranResult& r) { return r.p_value < 0.05 ? "*" : ""; };
    std::cout << "Global Moran's I (999 permutations; * marks p < 0.05)\n";
    std::cout << "  log duration:  I = " << mi_dur.statistic << star(mi_dur)
              << "  (p = " << mi_dur.p_value << ")\n";
    std::cout << "  log peak out:  I = " << mi_peak.statistic << star(mi_peak)
              << "  (p = " << mi_peak.p_value << ")\n";

    const ClusterAssignment clusters = labeled_kmeans_clusters(ds, derive_seed(seed, 3));
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    {
        auto csv = open_out(out / "clusters.csv");
        csv << "node_id,cluster,source\n";
        for (std::size_t v = 0; v < ds.n(); ++v)
            csv << v << "," << clusters.labels[v] << ","
                << (clusters.source[v] == ClusterSource::Kmeans ? "kmeans" : "inferred") << "\n";
    }
    write_cluster_map_svg(out / "cluster_map.svg", ds, clusters);
    {
        json mi;
        mi["log_duration"] = {{"I", mi_dur.statistic}, {"p", mi_dur.p_value}};
        mi["log_peak_customers_out"] = {{"I", mi_peak.statistic}, {"p", mi_peak.p_value}};
        mi["n_permutations"] = 999;
        open_out(out / "morans_i.json") << mi.dump(2) << "\n";
    }
    json args = {{"data", data_dir}, {"out", out_dir}};
    write_manifest(out, "analyze", args, seed,
                   {out / "clusters.csv", out / "cluster_map.svg", out / "morans_i.json"},
                   started);
    return 0;
}

int cmd_cv(const std::string& data_dir, const std::string& models, std::size_t folds,
           std::size_t repeats, std::uint64_t seed, std::size_t jobs, std::size_t epochs,
           const std::string& out_dir) {
    const std::string started = now_iso8601();
    std::vector<Variant> variants;
    std::stringstream ss(models);
    std::string name;
    while (std::getline(ss, name, ',')) variants.push_back(parse_variant(name));
    if (variants.empty()) throw ConfigError("cv: no models given");

    const fs::path in(data_dir);
    const EventDataset ds = load_event((in / "nodes.csv").string(), (in / "edges.csv").string());

    CvConfig cfg;
    cfg.folds = folds;
    cfg.repeats = repeats;
    cfg.base_seed = seed;
    cfg.jobs = jobs;
    cfg.train.epochs = epochs;
    const CvReport report = run_cv(ds, variants, cfg);

    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    open_out(out / "cv_report.json") << report.to_json();
    open_out(out / "cv_report.txt") << report.to_table();
    write_metrics_svg(out / "metrics.svg", report);
    std::cout << report.to_table();

    json args = {{"data", data_dir}, {"models", models},   {"folds", folds},
                 {"repeats", repeats}, {"jobs", jobs},     {"epochs", epochs},
                 {"out", out_dir}};
    write_manifest(out, "cv", args, seed,
                   {out / "cv_report.json", out / "cv_report.txt", out / "metrics.svg"}, started);
    return 0;
}

int cmd_predict(const std::string& data_dir, const std::string& checkpoint_in,
                const std::string& checkpoint_out, const std::string& model_name,
                std::uint64_t seed, bool trace, const std::string& out_dir) {
    const std::string started = now_iso8601();
    const fs::path in(data_dir);
    const EventDataset ds = load_event((in / "nodes.csv").string(), (in / "edges.csv").string());

    TrainMask mask(ds.n(), false);
    for (std::size_t v : ds.labeled_nodes()) mask[v] = true;
    Standardizer std_rec = fit_standardizer(ds, mask);
    const Matrix x = std_rec.apply(ds.features);

    const ClusterAssignment partial = labeled_kmeans_clusters(ds, derive_seed(seed, 3));
    TrainConfig tc;
    tc.seed = derive_seed(seed, 4);
    BigatModel cluster_model = train_cluster_model(x, ds.graph, partial, mask, tc, kFeatureDim);
    const ClusterAssignment clusters = infer_clusters(cluster_model, x, ds.graph, partial);

    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    std::vector<fs::path> outputs;

    BigatModel model = [&] {
        if (!checkpoint_in.empty()) {
            BigatModel m = load_checkpoint(checkpoint_in);
            if (m.config.input_dim != ds.features.cols)
                throw DataError("checkpoint expects " + std::to_string(m.config.input_dim) +
                                " feature columns, dataset has " +
                                std::to_string(ds.features.cols));
            return m;
        }
        ModelConfig mc;
        mc.variant = parse_variant(model_name);
        mc.seed = derive_seed(seed, 5);
        TrainConfig vtc;
        vtc.seed = mc.seed;
        BigatModel m = init_params(mc);
        const auto history = train_model(m, x, ds.graph, clusters, ds.labels(), mask, vtc);
        if (trace) {
            auto tr = open_out(out / "trace.csv");
            tr << "epoch,loss\n";
            for (std::size_t e = 0; e < history.size(); ++e) tr << e << "," << history[e] << "\n";
            outputs.push_back(out / "trace.csv");
        }
        return m;
    }();
    if (!checkpoint_out.empty()) {
        save_checkpoint(model, checkpoint_out);
        std::cout << "checkpoint written to " << checkpoint_out << "\n";
    }

    const std::vector<int> pred = predict(forward(model, x, ds.graph, clusters));
    {
        auto csv = open_out(out / "predictions.csv");
        csv << "node_id,predicted_class,cluster\n";
        for (std::size_t v = 0; v < ds.n(); ++v) {
            if (ds.is_labeled(v)) continue;  // only nodes lacking a duration estimate
            csv << v << "," << class_name(pred[v]) << "," << clusters.labels[v] << "\n";
        }
        outputs.push_back(out / "predictions.csv");
    }
    json args = {{"data", data_dir},       {"checkpoint", checkpoint_in},
                 {"save_checkpoint", checkpoint_out}, {"model", model_name},
                 {"trace", trace},         {"out", out_dir}};
    write_manifest(out, "predict", args, seed, outputs, started);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bimodal graph attention toolkit for hurricane power-outage durations"};
    app.require_subcommand(1);

    std::uint64_t seed = 42;
    std::size_t jobs = 1;
    bool trace = false;
    app.add_option("--seed", seed, "base random seed");
    app.add_option("--jobs", jobs, "parallel fold jobs");
    app.add_flag("--trace", trace, "emit per-epoch loss CSV where applicable");

    auto* gen = app.add_subcommand("gen", "generate a synthetic hurricane event");
    std::string gen_config, gen_out = "event";
    gen->add_option("--config", gen_config, "SynthConfig JSON file");
    gen->add_option("--out", gen_out, "output directory");

    auto* analyze = app.add_subcommand("analyze", "spatial statistics and K-means clusters");
    std::string an_data = "event", an_out = "analysis";
    analyze->add_option("--data", an_data, "dataset directory (nodes.csv + edges.csv)");
    analyze->add_option("--out", an_out, "output directory");

    auto* cv = app.add_subcommand("cv", "repeated stratified cross-validation");
    std::string cv_data = "event", cv_models = "gcn,gat,bigat,bigat-ud", cv_out = "cv";
    std::size_t cv_folds = 5, cv_repeats = 6, cv_epochs = 300;
    cv->add_option("--data", cv_data, "dataset directory");
    cv->add_option("--models", cv_models, "comma-separated: gcn,gat,bigat,bigat-ud");
    cv->add_option("--folds", cv_folds, "folds per repeat");
    cv->add_option("--repeats", cv_repeats, "number of repeats");
    cv->add_option("--epochs", cv_epochs, "training epochs per run");
    cv->add_option("--out", cv_out, "output directory");

    auto* pred = app.add_subcommand("predict", "label nodes that lack a duration estimate");
    std::string p_data = "event", p_ckpt_in, p_ckpt_out, p_model = "bigat", p_out = "predictions";
    pred->add_option("--data", p_data, "dataset directory");
    pred->add_option("--checkpoint", p_ckpt_in, "load model from checkpoint");
    pred->add_option("--save-checkpoint", p_ckpt_out, "save trained model");
    pred->add_option("--model", p_model, "variant to train when no checkpoint is given");
    pred->add_option("--out", p_out, "output directory");

    std::optional<std::uint64_t> seed_override;
    try {
        app.parse(argc, argv);
        if (app.count("--seed")) seed_override = seed;
        if (gen->parsed()) return cmd_gen(gen_config, gen_out, seed_override);
        if (analyze->parsed()) return cmd_analyze(an_data, an_out, seed);
        if (cv->parsed())
            return cmd_cv(cv_data, cv_models, cv_folds, cv_repeats, seed, jobs, cv_epochs,
                          cv_out);
        if (pred->parsed())
            return cmd_predict(p_data, p_ckpt_in, p_ckpt_out, p_model, seed, trace, p_out);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
