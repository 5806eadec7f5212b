#pragma once

#include <vector>

#include "bigat/dataset.hpp"
#include "bigat/kmeans.hpp"

namespace bigat {

enum class ClusterSource { Unset, Kmeans, Inferred };

// Per-node bimodal cluster labels: 1 = significantly impacted, 2 = less
// impacted, 0 = unset. Training nodes get kmeans labels, test nodes are
// filled in later by the pre-trained cluster model.
struct ClusterAssignment {
    std::vector<std::size_t> labels;   // values {0,1,2}
    std::vector<ClusterSource> source;
    std::vector<Point> centroids;      // 2 points in standardized feature space

    bool complete() const;
};

// (log(duration_days + 1/24), band-weighted swath severity), both z-scored
// over node_set. Every node in node_set must carry a duration label.
std::vector<Point> severity_features(const EventDataset& ds,
                                     const std::vector<std::size_t>& node_set);

// Canonical relabeling of a k=2 result: the centroid with the greater
// standardized log-duration mean becomes cluster 1; ties go to the higher
// swath-severity centroid.
ClusterAssignment assign_clusters(const KmeansResult& result,
                                  const std::vector<std::size_t>& node_set, std::size_t n);

}  // namespace bigat
