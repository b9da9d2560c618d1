#pragma once

#include <vector>

#include "actclust/dec.hpp"
#include "actclust/store.hpp"
#include "actclust/tensor.hpp"

namespace actclust {

// p(y = c | z = z_k) estimated from training data with additive smoothing;
// rows sum to 1.
struct EmpiricalPosterior {
    Tensor matrix;  // [n_clusters, n_classes]
    double epsilon = 0.0;
};

// P[k][c] = (eps + sum_{i: y_i = c} q_ik) / (n_classes * eps + sum_i q_ik).
// Soft counts: each sample contributes its assignment probability.
EmpiricalPosterior fit_posterior(const SoftAssignment& q_train, const LabelArray& labels, int n_classes,
                                 double epsilon = 1e-6);

struct LayerSurrogate {
    ClusterModel cluster_model;
    EmpiricalPosterior posterior;
};

// Matrix product q . P; pure core of layer_predict, exposed for oracles.
Tensor predict_from_assignment(const SoftAssignment& q, const EmpiricalPosterior& posterior);

// p(y|x) = sum_k p(y|z_k) q_k(x) on one layer's activations.
Tensor layer_predict(const LayerSurrogate& surrogate, const Tensor& activations);

struct FullSurrogate {
    std::vector<LayerSurrogate> layers;
    std::vector<double> weights;  // nonnegative, normalized to sum 1 at prediction time

    void validate() const;
};

// Weighted average of the layer predictions. Rows already sum to 1 by
// convexity; no renormalization is applied.
Tensor full_predict(const FullSurrogate& surrogate, const std::vector<Tensor>& per_layer_activations);

struct EvalReport {
    double accuracy = 0.0;
    double fidelity = 0.0;
    std::vector<std::vector<long>> confusion;  // confusion[true][predicted] for the surrogate
};

// accuracy = mean[argmax surrogate == label];
// fidelity = mean[argmax surrogate == baseline prediction].
EvalReport evaluate(const FullSurrogate& surrogate, const std::vector<Tensor>& per_layer_activations,
                    const LabelArray& labels, const std::vector<int>& baseline_predictions);

// Metric core over already-computed predictions.
EvalReport metrics_from_predictions(const std::vector<int>& surrogate_pred, const std::vector<int>& labels,
                                    const std::vector<int>& baseline_pred, int n_classes);

std::vector<int> argmax_rows(const Tensor& proba);

}  // namespace actclust
