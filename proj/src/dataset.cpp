#include "bigat/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bigat/errors.hpp"
#include "bigat/kmeans.hpp"
#include "bigat/rng.hpp"

namespace bigat {

const std::array<std::string, kFeatureDim>& FeatureSchema::names() {
    static const std::array<std::string, kFeatureDim> kNames = {
        "peak_customers_out", "population",      "area",           "svi_theme1",
        "svi_theme2",         "svi_theme3",      "svi_theme4",     "swath_none_frac",
        "swath_34_frac",      "swath_50_frac",   "swath_64_frac"};
    return kNames;
}

std::vector<std::size_t> EventDataset::labeled_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < n(); ++v)
        if (is_labeled(v)) out.push_back(v);
    return out;
}

std::vector<int> EventDataset::labels() const {
    std::vector<int> out(n(), -1);
    for (std::size_t v = 0; v < n(); ++v)
        if (is_labeled(v)) out[v] = static_cast<int>(label_duration(*duration_days[v]));
    return out;
}

DurationClass label_duration(double days) {
    if (days < 0.0 || !std::isfinite(days))
        throw DataError("label_duration: invalid duration " + std::to_string(days));
    if (days < 2.0) return DurationClass::Short;
    if (days <= 6.0) return DurationClass::Medium;
    return DurationClass::Long;
}

std::string class_name(int c) {
    switch (c) {
        case 0: return "short";
        case 1: return "medium";
        case 2: return "long";
        default: return "unlabeled";
    }
}

namespace {

// shortest representation that parses back to the same double
std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_cell(const std::string& cell, const std::string& file, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw DataError(file + ":" + std::to_string(lineno) + ": non-numeric cell '" + cell + "'");
    }
}

void check_swath_simplex(const Matrix& features, std::size_t row, const std::string& file,
                         std::size_t lineno) {
    double sum = 0.0;
    for (std::size_t j = FeatureSchema::kSwathNone; j <= FeatureSchema::kSwath64; ++j) {
        const double f = features(row, j);
        if (f < 0.0 || f > 1.0)
            throw DataError(file + ":" + std::to_string(lineno) + ": swath fraction " +
                            std::to_string(f) + " outside [0,1]");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw DataError(file + ":" + std::to_string(lineno) + ": swath fractions sum to " +
                        std::to_string(sum) + ", expected 1");
}

const std::vector<std::string>& node_header_columns() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c = {"node_id", "name", "x", "y"};
        for (const auto& f : FeatureSchema::names()) c.push_back(f);
        c.push_back("duration_days");
        return c;
    }();
    return cols;
}

}  // namespace

EventDataset load_event(const std::string& nodes_file, const std::string& edges_file) {
    std::ifstream in(nodes_file);
    if (!in) throw DataError("cannot open nodes file " + nodes_file);
    std::string line;
    if (!std::getline(in, line)) throw DataError(nodes_file + ": empty file");
    const auto header = split_csv_line(line);
    const auto& expected = node_header_columns();
    const bool has_planted =
        header.size() == expected.size() + 1 && header.back() == "planted_cluster";
    if (!has_planted && header != expected) {
        std::string want;
        for (const auto& c : expected) want += c + ",";
        throw DataError(nodes_file + ":1: bad header; expected columns " + want +
                        "[planted_cluster]");
    }
    const std::size_t ncols = expected.size() + (has_planted ? 1 : 0);

    std::vector<std::vector<std::string>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != ncols)
            throw DataError(nodes_file + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(ncols) + " cells, got " + std::to_string(cells.size()));
        rows.push_back(std::move(cells));
    }

    const std::size_t n = rows.size();
    EventDataset ds;
    ds.features = Matrix(n, kFeatureDim);
    ds.duration_days.resize(n);
    ds.node_names.resize(n);
    ds.planted_cluster.resize(n);
    std::vector<std::pair<double, double>> coords(n);

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ln = i + 2;
        const auto& cells = rows[i];
        const auto id = static_cast<std::size_t>(parse_cell(cells[0], nodes_file, ln));
        if (id != i)
            throw DataError(nodes_file + ":" + std::to_string(ln) + ": node_id " +
                            std::to_string(id) + " out of order, expected " + std::to_string(i));
        ds.node_names[i] = cells[1];
        coords[i] = {parse_cell(cells[2], nodes_file, ln), parse_cell(cells[3], nodes_file, ln)};
        for (std::size_t j = 0; j < kFeatureDim; ++j)
            ds.features(i, j) = parse_cell(cells[4 + j], nodes_file, ln);
        check_swath_simplex(ds.features, i, nodes_file, ln);
        const std::string& dur = cells[4 + kFeatureDim];
        if (!dur.empty()) {
            const double days = parse_cell(dur, nodes_file, ln);
            label_duration(days);  // validates nonnegative
            ds.duration_days[i] = days;
        }
        if (has_planted && !cells.back().empty()) {
            const auto pc = static_cast<std::size_t>(parse_cell(cells.back(), nodes_file, ln));
            if (pc != 1 && pc != 2)
                throw DataError(nodes_file + ":" + std::to_string(ln) + ": planted_cluster must be 1 or 2");
            ds.planted_cluster[i] = pc;
        }
    }
    ds.graph = load_edges_csv(edges_file, n);
    ds.graph.coords = std::move(coords);
    if (ds.labeled_nodes().empty()) throw DataError(nodes_file + ": no labeled nodes");
    return ds;
}

void save_event(const EventDataset& ds, const std::string& nodes_file,
                const std::string& edges_file) {
    std::ofstream out(nodes_file);
    if (!out) throw DataError("cannot write nodes file " + nodes_file);
    const bool has_planted =
        std::any_of(ds.planted_cluster.begin(), ds.planted_cluster.end(),
                    [](const auto& p) { return p.has_value(); });
    for (std::size_t c = 0; c < node_header_columns().size(); ++c)
        out << (c ? "," : "") << node_header_columns()[c];
    if (has_planted) out << ",planted_cluster";
    out << "\n";
    for (std::size_t v = 0; v < ds.n(); ++v) {
        const auto [x, y] = ds.graph.coords ? (*ds.graph.coords)[v] : std::pair{0.0, 0.0};
        out << v << "," << ds.node_names[v] << "," << fmt_double(x) << "," << fmt_double(y);
        for (std::size_t j = 0; j < kFeatureDim; ++j) out << "," << fmt_double(ds.features(v, j));
        out << ",";
        if (ds.duration_days[v]) out << fmt_double(*ds.duration_days[v]);
        if (has_planted) {
            out << ",";
            if (ds.planted_cluster[v]) out << *ds.planted_cluster[v];
        }
        out << "\n";
    }
    save_edges_csv(ds.graph, edges_file);
}

Matrix Standardizer::apply(const Matrix& raw) {
    if (used_) throw ConfigError("Standardizer: transform record is single-use");
    used_ = true;
    if (raw.cols != kFeatureDim) throw DimensionError("Standardizer: feature width != 11");
    Matrix out = raw;
    for (std::size_t i = 0; i < out.rows; ++i) {
        for (std::size_t j = 0; j < kFeatureDim; ++j) {
            double v = out(i, j);
            if (j <= FeatureSchema::kArea) v = std::log1p(v);
            // columns at the std floor are constant on training nodes; map them to 0 exactly
            out(i, j) = stddev[j] <= 1e-8 ? 0.0 : (v - mean[j]) / stddev[j];
        }
    }
    return out;
}

Standardizer fit_standardizer(const EventDataset& ds, const std::vector<bool>& train_mask) {
    if (std::none_of(train_mask.begin(), train_mask.end(), [](bool b) { return b; }))
        throw DataError("fit_standardizer: empty training mask");
    Standardizer s;
    s.mean.assign(kFeatureDim, 0.0);
    s.stddev.assign(kFeatureDim, 0.0);
    double count = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        if (!train_mask[i]) continue;
        count += 1.0;
        for (std::size_t j = 0; j < kFeatureDim; ++j) {
            double v = ds.features(i, j);
            if (j <= FeatureSchema::kArea) v = std::log1p(v);
            s.mean[j] += v;
        }
    }
    for (double& m : s.mean) m /= count;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        if (!train_mask[i]) continue;
        for (std::size_t j = 0; j < kFeatureDim; ++j) {
            double v = ds.features(i, j);
            if (j <= FeatureSchema::kArea) v = std::log1p(v);
            s.stddev[j] += (v - s.mean[j]) * (v - s.mean[j]);
        }
    }
    for (double& sd : s.stddev) sd = std::max(std::sqrt(sd / count), 1e-8);
    return s;
}

namespace {

double dist_to_segment(double px, double py, double ax, double ay, double bx, double by) {
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double qx = ax + t * dx, qy = ay + t * dy;
    return std::hypot(px - qx, py - qy);
}

double dist_to_track(double x, double y, const std::vector<std::pair<double, double>>& track) {
    if (track.size() == 1) return std::hypot(x - track[0].first, y - track[0].second);
    double best = 1e300;
    for (std::size_t i = 0; i + 1 < track.size(); ++i)
        best = std::min(best, dist_to_segment(x, y, track[i].first, track[i].second,
                                              track[i + 1].first, track[i + 1].second));
    return best;
}

// clamped-linear membership, softened over +-soft around the radius
double band_membership(double dist, double radius, double soft) {
    return std::clamp((radius + soft - dist) / (2.0 * soft), 0.0, 1.0);
}

}  // namespace

EventDataset synth_event(const SynthConfig& cfg) {
    if (cfg.track.empty()) throw ConfigError("synth_event: empty track");
    if (!(cfg.r64 < cfg.r50 && cfg.r50 < cfg.r34))
        throw ConfigError("synth_event: band radii must satisfy r64 < r50 < r34");
    if (cfg.label_noise < 0.0 || cfg.label_noise >= 1.0)
        throw ConfigError("synth_event: label_noise must be in [0,1)");

    EventDataset ds;
    ds.name = "synthetic";
    ds.graph = grid_graph(cfg.grid_rows, cfg.grid_cols);
    const std::size_t n = ds.graph.n;
    ds.features = Matrix(n, kFeatureDim);
    ds.duration_days.resize(n);
    ds.node_names.resize(n);
    ds.planted_cluster.resize(n);
    for (std::size_t v = 0; v < n; ++v) ds.node_names[v] = "county_" + std::to_string(v);

    Rng rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // two spatially smoothed noise fields: one jitters the track distance so
    // the stored swath fractions carry the noise, one perturbs severity directly
    auto smooth_field = [&] {
        std::vector<double> z(n);
        for (double& x : z) x = normal(rng);
        for (int pass = 0; pass < 2; ++pass) {
            std::vector<double> next(n);
            for (std::size_t v = 0; v < n; ++v) {
                double acc = z[v];
                for (std::size_t u : ds.graph.neighbors[v]) acc += z[u];
                next[v] = acc / static_cast<double>(1 + ds.graph.neighbors[v].size());
            }
            z = std::move(next);
        }
        return z;
    };
    const std::vector<double> jitter = smooth_field();
    const std::vector<double> noise = smooth_field();

    // wind-swath fractions from (jittered) distance to the track
    constexpr double kSoft = 0.35;
    std::vector<double> raw_sev(n);
    for (std::size_t v = 0; v < n; ++v) {
        const auto [x, y] = (*ds.graph.coords)[v];
        const double d =
            std::max(dist_to_track(x, y, cfg.track) + cfg.feature_noise * jitter[v], 0.0);
        const double c64 = band_membership(d, cfg.r64, kSoft);
        const double c50 = band_membership(d, cfg.r50, kSoft);
        const double c34 = band_membership(d, cfg.r34, kSoft);
        ds.features(v, FeatureSchema::kSwath64) = c64;
        ds.features(v, FeatureSchema::kSwath50) = c50 - c64;
        ds.features(v, FeatureSchema::kSwath34) = c34 - c50;
        ds.features(v, FeatureSchema::kSwathNone) = 1.0 - c34;
        raw_sev[v] = 3.0 * c64 + 2.0 * (c50 - c64) + 1.0 * (c34 - c50);
    }

    // latent severity = weighted swath severity + small smoothed perturbation
    constexpr double kSevNoise = 0.05;
    std::vector<double> severity(n);
    for (std::size_t v = 0; v < n; ++v) severity[v] = raw_sev[v] + kSevNoise * noise[v];

    // monotone severity -> duration map; calibrated so the class boundaries
    // (2 and 6 days) fall at severity 0.5 and 1.5, mid-way through the band
    // transitions, and the default track yields all three classes
    for (std::size_t v = 0; v < n; ++v) {
        const double days = 1.1547 * std::exp(1.0986 * std::max(severity[v], 0.0));
        ds.duration_days[v] = days;
    }

    // planted two-regime structure: 2-means split of the severity field
    std::vector<Point> sev_pts(n);
    for (std::size_t v = 0; v < n; ++v) sev_pts[v] = {severity[v]};
    KmeansResult split = kmeans(sev_pts, 2, 5, 100, derive_seed(cfg.seed, 0xc1));
    const std::size_t hi = split.centroids[0][0] >= split.centroids[1][0] ? 0 : 1;
    for (std::size_t v = 0; v < n; ++v)
        ds.planted_cluster[v] = split.assignments[v] == hi ? 1 : 2;

    // count-like features correlated with severity, with a regime-dependent
    // outage pattern: the impacted regime loses most of its customers with the
    // fraction easing as severity climbs (hardened critical-zone grid), the calm
    // regime loses a small share growing with severity
    for (std::size_t v = 0; v < n; ++v) {
        const double population = std::exp(10.0 + 0.35 * severity[v] + 0.03 * normal(rng));
        const double base = *ds.planted_cluster[v] == 1
                                ? 0.92 - 0.18 * (severity[v] - 1.5)
                                : 0.06 + 0.26 * severity[v];
        const double frac =
            std::clamp(base + 0.05 * cfg.feature_noise * normal(rng), 0.01, 0.98);
        ds.features(v, FeatureSchema::kPopulation) = std::round(population);
        ds.features(v, FeatureSchema::kPeakCustomersOut) = std::round(population * frac);
        ds.features(v, FeatureSchema::kArea) = std::round(60.0 + 40.0 * severity[v]);
        for (std::size_t j = 0; j < 4; ++j) ds.features(v, FeatureSchema::kSvi1 + j) = unit(rng);
    }

    // label noise: flip to an adjacent class by redrawing the duration just
    // past the shared boundary, keeping the class consistent with duration_days
    for (std::size_t v = 0; v < n; ++v) {
        if (unit(rng) >= cfg.label_noise) continue;
        const int cur = static_cast<int>(label_duration(*ds.duration_days[v]));
        int other;
        if (cur == 0) other = 1;
        else if (cur == 2) other = 1;
        else other = unit(rng) < 0.5 ? 0 : 2;
        switch (other) {
            case 0: ds.duration_days[v] = 1.84 + 0.15 * unit(rng); break;
            case 1: ds.duration_days[v] = cur == 0 ? 2.02 + 0.38 * unit(rng)
                                                   : 5.45 + 0.54 * unit(rng); break;
            default: ds.duration_days[v] = 6.02 + 0.48 * unit(rng); break;
        }
    }
    return ds;
}

std::string synth_config_to_json(const SynthConfig& cfg) {
    nlohmann::json j;
    j["version"] = 1;
    j["grid_rows"] = cfg.grid_rows;
    j["grid_cols"] = cfg.grid_cols;
    j["track"] = nlohmann::json::array();
    for (const auto& [x, y] : cfg.track) j["track"].push_back({x, y});
    j["r64"] = cfg.r64;
    j["r50"] = cfg.r50;
    j["r34"] = cfg.r34;
    j["label_noise"] = cfg.label_noise;
    j["feature_noise"] = cfg.feature_noise;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

SynthConfig synth_config_from_json(const std::string& text) {
    SynthConfig cfg;
    try {
        const nlohmann::json j = nlohmann::json::parse(text);
        if (j.contains("version") && j.at("version").get<int>() != 1)
            throw ConfigError("config: unsupported version");
        if (j.contains("grid_rows")) cfg.grid_rows = j.at("grid_rows").get<std::size_t>();
        if (j.contains("grid_cols")) cfg.grid_cols = j.at("grid_cols").get<std::size_t>();
        if (j.contains("track")) {
            cfg.track.clear();
            for (const auto& p : j.at("track"))
                cfg.track.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        }
        if (j.contains("r64")) cfg.r64 = j.at("r64").get<double>();
        if (j.contains("r50")) cfg.r50 = j.at("r50").get<double>();
        if (j.contains("r34")) cfg.r34 = j.at("r34").get<double>();
        if (j.contains("label_noise")) cfg.label_noise = j.at("label_noise").get<double>();
        if (j.contains("feature_noise")) cfg.feature_noise = j.at("feature_noise").get<double>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

}  // namespace bigat
