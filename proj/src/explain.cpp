#include "actclust/explain.hpp"

#include <algorithm>
#include <cmath>

#include "actclust/errors.hpp"
#include "actclust/kmeans.hpp"

namespace actclust {

SimilarityResult rank_similar(const std::vector<Tensor>& query_embeddings,
                              const std::vector<Tensor>& train_embeddings,
                              const std::vector<double>& weights, int top_k, int query_id) {
    if (top_k <= 0) throw ConfigError("rank_similar: top_k must be positive");
    const std::size_t n_layers = train_embeddings.size();
    if (n_layers == 0) throw ConfigError("rank_similar: no layers given");
    if (query_embeddings.size() != n_layers || weights.size() != n_layers) {
        throw ShapeError("rank_similar: layer counts disagree (" + std::to_string(query_embeddings.size()) +
                         " query, " + std::to_string(n_layers) + " train, " + std::to_string(weights.size()) +
                         " weights)");
    }
    double total = 0.0;
    for (const double w : weights) {
        if (w < 0.0) throw ConfigError("rank_similar: weights must be non-negative");
        total += w;
    }
    if (total <= 0.0) throw ConfigError("rank_similar: weights must not be all zero");

    const int n_train = train_embeddings.front().rows();
    for (std::size_t j = 0; j < n_layers; ++j) {
        if (train_embeddings[j].rows() != n_train) {
            throw ShapeError("rank_similar: train embedding row counts disagree");
        }
        if (query_embeddings[j].size() != static_cast<std::size_t>(train_embeddings[j].cols())) {
            throw ShapeError("rank_similar: query dim " + std::to_string(query_embeddings[j].size()) +
                             " vs train dim " + std::to_string(train_embeddings[j].cols()) + " at layer " +
                             std::to_string(j));
        }
    }

    SimilarityResult result;
    result.query_id = query_id;
    result.weights.reserve(n_layers);
    for (const double w : weights) result.weights.push_back(w / total);

    result.ranked.resize(static_cast<std::size_t>(n_train));
    for (int i = 0; i < n_train; ++i) {
        RankedExample& ex = result.ranked[static_cast<std::size_t>(i)];
        ex.train_index = i;
        ex.per_layer_distances.resize(n_layers);
        double score = 0.0;
        for (std::size_t j = 0; j < n_layers; ++j) {
            const double d2 = sq_dist(query_embeddings[j].data.data(), train_embeddings[j].row(i),
                                      train_embeddings[j].cols());
            ex.per_layer_distances[j] = d2;
            score += result.weights[j] * d2;
        }
        ex.combined_score = score;
    }

    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(top_k), result.ranked.size());
    std::partial_sort(result.ranked.begin(), result.ranked.begin() + static_cast<std::ptrdiff_t>(keep),
                      result.ranked.end(), [](const RankedExample& a, const RankedExample& b) {
                          if (a.combined_score != b.combined_score) return a.combined_score < b.combined_score;
                          return a.train_index < b.train_index;
                      });
    result.ranked.resize(keep);
    return result;
}

std::vector<Concept> extract_concepts(const ClusterModel& model, const Tensor& train_embeddings,
                                      const LabelArray& labels, int n_classes, int m) {
    const int n_train = train_embeddings.rows();
    if (m < 1) throw ConfigError("extract_concepts: m must be >= 1");
    if (m > n_train) {
        throw ConfigError("extract_concepts: m=" + std::to_string(m) + " exceeds training set size " +
                          std::to_string(n_train));
    }
    if (labels.count() != n_train) {
        throw ShapeError("extract_concepts: " + std::to_string(labels.count()) + " labels for " +
                         std::to_string(n_train) + " embeddings");
    }
    labels.validate(n_classes);
    if (train_embeddings.cols() != model.centroids.cols()) {
        throw ShapeError("extract_concepts: embedding dim does not match centroid dim");
    }

    std::vector<Concept> concepts;
    concepts.reserve(static_cast<std::size_t>(model.centroids.rows()));
    std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(n_train));
    for (int c = 0; c < model.centroids.rows(); ++c) {
        for (int i = 0; i < n_train; ++i) {
            dist[static_cast<std::size_t>(i)] = {
                sq_dist(model.centroids.row(c), train_embeddings.row(i), train_embeddings.cols()), i};
        }
        std::partial_sort(dist.begin(), dist.begin() + m, dist.end());

        Concept entry;
        entry.layer_name = model.layer_name;
        entry.cluster_index = c;
        entry.label_histogram.assign(static_cast<std::size_t>(n_classes), 0);
        double total = 0.0;
        for (int r = 0; r < m; ++r) {
            const auto& [d2, idx] = dist[static_cast<std::size_t>(r)];
            const double d = std::sqrt(d2);
            entry.members.push_back(idx);
            entry.member_distances.push_back(d);
            ++entry.label_histogram[static_cast<std::size_t>(labels.values[static_cast<std::size_t>(idx)])];
            total += d;
        }
        entry.mean_member_distance = total / static_cast<double>(m);
        concepts.push_back(std::move(entry));
    }
    return concepts;
}

std::vector<double> concept_purity(const std::vector<Concept>& concepts) {
    std::vector<double> purity;
    purity.reserve(concepts.size());
    for (const Concept& c : concepts) {
        if (c.members.empty()) throw ConfigError("concept_purity: concept has no members");
        long best = 0;
        long total = 0;
        for (const long count : c.label_histogram) {
            best = std::max(best, count);
            total += count;
        }
        purity.push_back(static_cast<double>(best) / static_cast<double>(total));
    }
    return purity;
}

double mean_concept_purity(const std::vector<Concept>& concepts) {
    const std::vector<double> purity = concept_purity(concepts);
    double total = 0.0;
    for (const double p : purity) total += p;
    return purity.empty() ? 0.0 : total / static_cast<double>(purity.size());
}

}  // namespace actclust
