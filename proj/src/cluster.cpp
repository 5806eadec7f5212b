#include "bigat/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bigat/errors.hpp"

namespace bigat {

bool ClusterAssignment::complete() const {
    return std::all_of(labels.begin(), labels.end(), [](std::size_t l) { return l != 0; });
}

std::vector<Point> severity_features(const EventDataset& ds,
                                     const std::vector<std::size_t>& node_set) {
    constexpr double kEps = 1.0 / 24.0;  // one hour, in days
    std::vector<Point> pts;
    pts.reserve(node_set.size());
    for (std::size_t v : node_set) {
        if (!ds.is_labeled(v))
            throw DataError("severity_features: node " + std::to_string(v) + " has no duration");
        const double log_dur = std::log(*ds.duration_days[v] + kEps);
        const double sev = 1.0 * ds.features(v, FeatureSchema::kSwath34) +
                           2.0 * ds.features(v, FeatureSchema::kSwath50) +
                           3.0 * ds.features(v, FeatureSchema::kSwath64);
        pts.push_back({log_dur, sev});
    }
    // z-score both coordinates over node_set
    for (std::size_t j = 0; j < 2; ++j) {
        double mean = 0.0;
        for (const auto& p : pts) mean += p[j];
        mean /= static_cast<double>(pts.size());
        double var = 0.0;
        for (const auto& p : pts) var += (p[j] - mean) * (p[j] - mean);
        const double sd = std::max(std::sqrt(var / static_cast<double>(pts.size())), 1e-8);
        for (auto& p : pts) p[j] = (p[j] - mean) / sd;
    }
    return pts;
}

ClusterAssignment assign_clusters(const KmeansResult& result,
                                  const std::vector<std::size_t>& node_set, std::size_t n) {
    if (result.centroids.size() != 2)
        throw ConfigError("assign_clusters: BiGAT embedding is bimodal, need k=2, got k=" +
                          std::to_string(result.centroids.size()));
    if (result.assignments.size() != node_set.size())
        throw DimensionError("assign_clusters: kmeans result does not match node_set");

    const auto& c0 = result.centroids[0];
    const auto& c1 = result.centroids[1];
    bool zero_is_impacted;
    if (c0[0] != c1[0]) {
        zero_is_impacted = c0[0] > c1[0];
    } else {
        zero_is_impacted = c0[1] > c1[1];  // duration tie: higher swath severity wins
    }

    ClusterAssignment out;
    out.labels.assign(n, 0);
    out.source.assign(n, ClusterSource::Unset);
    out.centroids = zero_is_impacted ? std::vector<Point>{c0, c1} : std::vector<Point>{c1, c0};
    for (std::size_t i = 0; i < node_set.size(); ++i) {
        const bool impacted = (result.assignments[i] == 0) == zero_is_impacted;
        out.labels[node_set[i]] = impacted ? 1 : 2;
        out.source[node_set[i]] = ClusterSource::Kmeans;
    }
    return out;
}

}  // namespace bigat
