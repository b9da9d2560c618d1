#pragma once

#include <cstdint>
#include <vector>

#include "actclust/tensor.hpp"

namespace actclust {

struct KMeansResult {
    Tensor centroids;             // [k, dim]
    std::vector<int> assignment;  // nearest centroid per point, ties to lowest index
    double inertia = 0.0;         // sum of squared point-to-centroid distances
    int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding; best of `restarts` runs by
// inertia. Runs until assignments are stable or max_iter sweeps.
KMeansResult kmeans(const Tensor& points, int k, int restarts, std::uint64_t seed, int max_iter = 300);

// Squared Euclidean distance between two rows.
double sq_dist(const float* a, const float* b, int dim);

}  // namespace actclust
