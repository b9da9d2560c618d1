#pragma once

#include <string>
#include <vector>

#include "actclust/dec.hpp"
#include "actclust/tensor.hpp"

namespace actclust {

struct RankedExample {
    int train_index = 0;
    double combined_score = 0.0;               // weighted sum of squared distances
    std::vector<double> per_layer_distances;   // squared Euclidean, one per layer
};

struct SimilarityResult {
    int query_id = -1;
    std::vector<RankedExample> ranked;  // ascending by combined_score, ties by lower index
    std::vector<double> weights;        // normalized weights actually used
};

// combined_score(i) = sum_j w_j |z_j(query) - z_j(x_i)|^2 with w normalized to
// sum 1. Returns the top_k smallest (or all of them when the training set is
// smaller).
SimilarityResult rank_similar(const std::vector<Tensor>& query_embeddings,
                              const std::vector<Tensor>& train_embeddings,
                              const std::vector<double>& weights, int top_k, int query_id = -1);

struct Concept {
    std::string layer_name;
    int cluster_index = 0;
    std::vector<int> members;                // top-m train indices, ascending by distance
    std::vector<double> member_distances;    // Euclidean, aligned with members
    std::vector<long> label_histogram;       // size n_classes, sums to m
    double mean_member_distance = 0.0;
};

// For each centroid, the m training embeddings nearest by Euclidean distance,
// regardless of hard assignment; always returns n_clusters concepts.
std::vector<Concept> extract_concepts(const ClusterModel& model, const Tensor& train_embeddings,
                                      const LabelArray& labels, int n_classes, int m);

// Dominant-label fraction per concept.
std::vector<double> concept_purity(const std::vector<Concept>& concepts);

double mean_concept_purity(const std::vector<Concept>& concepts);

}  // namespace actclust
