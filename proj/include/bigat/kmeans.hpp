#pragma once

#include <cstdint>
#include <vector>

namespace bigat {

using Point = std::vector<double>;

struct KmeansResult {
    std::vector<std::size_t> assignments;
    std::vector<Point> centroids;
    double inertia = 0.0;
    std::size_t iterations = 0;
};

// Lloyd's algorithm, k-means++ seeding, best of `restarts` runs. Emptied
// clusters are reseeded to the point farthest from its centroid.
KmeansResult kmeans(const std::vector<Point>& points, std::size_t k, std::size_t restarts,
                    std::size_t max_iter, std::uint64_t seed);

// Chance-corrected partition agreement, used to score cluster recovery.
double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

}  // namespace bigat
