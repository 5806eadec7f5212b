#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bigat/graph.hpp"
#include "bigat/matrix.hpp"

namespace bigat {

// Outage duration classes, short < medium < long.
enum class DurationClass : int { Short = 0, Medium = 1, Long = 2 };

constexpr std::size_t kFeatureDim = 11;

// Ordered names of the 11 node features. The last four are wind-swath area
// fractions and must sum to 1 per node.
struct FeatureSchema {
    static const std::array<std::string, kFeatureDim>& names();
    static constexpr std::size_t kPeakCustomersOut = 0;
    static constexpr std::size_t kPopulation = 1;
    static constexpr std::size_t kArea = 2;
    static constexpr std::size_t kSvi1 = 3;
    static constexpr std::size_t kSwathNone = 7;
    static constexpr std::size_t kSwath34 = 8;
    static constexpr std::size_t kSwath50 = 9;
    static constexpr std::size_t kSwath64 = 10;
};

struct EventDataset {
    std::string name;
    Matrix features;  // n x 11, raw scale
    std::vector<std::optional<double>> duration_days;
    std::vector<std::string> node_names;
    SpatialGraph graph;
    std::vector<std::optional<std::size_t>> planted_cluster;  // synthetic only, values {1,2}

    std::size_t n() const { return graph.n; }
    bool is_labeled(std::size_t v) const { return duration_days[v].has_value(); }
    std::vector<std::size_t> labeled_nodes() const;
    // duration class per node; -1 for unlabeled
    std::vector<int> labels() const;
};

// days < 2 -> short; 2 <= days <= 6 -> medium; days > 6 -> long
DurationClass label_duration(double days);
std::string class_name(int c);

EventDataset load_event(const std::string& nodes_file, const std::string& edges_file);
void save_event(const EventDataset& ds, const std::string& nodes_file,
                const std::string& edges_file);

// Per-fold feature transform: log1p on the three count-like columns, then
// z-score with statistics from the training nodes only. Single use.
struct Standardizer {
    std::vector<double> mean;  // post-log1p
    std::vector<double> stddev;

    Matrix apply(const Matrix& raw);

private:
    bool used_ = false;
};

Standardizer fit_standardizer(const EventDataset& ds, const std::vector<bool>& train_mask);

struct SynthConfig {
    std::size_t grid_rows = 10;
    std::size_t grid_cols = 40;
    std::vector<std::pair<double, double>> track = {{-1.0, -0.5}, {40.0, -0.5}};
    double r64 = 2.0;
    double r50 = 4.0;
    double r34 = 6.0;
    double label_noise = 0.1;
    double feature_noise = 0.1;
    std::uint64_t seed = 1;
};

// Synthetic hurricane event on a grid of counties: wind-swath bands from the
// distance to the track polyline, latent severity with spatially smoothed
// noise, monotone severity -> duration map, planted two-regime clusters.
EventDataset synth_event(const SynthConfig& cfg);

std::string synth_config_to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const std::string& text);

}  // namespace bigat
