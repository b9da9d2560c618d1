#include "actclust/surrogate.hpp"

#include <string>

#include "actclust/errors.hpp"

namespace actclust {

EmpiricalPosterior fit_posterior(const SoftAssignment& q_train, const LabelArray& labels, int n_classes,
                                 double epsilon) {
    const int n = q_train.q.rows();
    const int k = q_train.q.cols();
    if (labels.count() != n) {
        throw ShapeError("fit_posterior: " + std::to_string(labels.count()) + " labels for " +
                         std::to_string(n) + " assignment rows");
    }
    labels.validate(n_classes);
    if (epsilon < 0.0) throw ConfigError("fit_posterior: epsilon must be non-negative");

    std::vector<std::vector<double>> counts(static_cast<std::size_t>(k),
                                            std::vector<double>(static_cast<std::size_t>(n_classes), 0.0));
    std::vector<double> mass(static_cast<std::size_t>(k), 0.0);
    for (int i = 0; i < n; ++i) {
        const float* qi = q_train.q.row(i);
        const int y = labels.values[static_cast<std::size_t>(i)];
        for (int c = 0; c < k; ++c) {
            counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(y)] += static_cast<double>(qi[c]);
            mass[static_cast<std::size_t>(c)] += static_cast<double>(qi[c]);
        }
    }

    EmpiricalPosterior post;
    post.epsilon = epsilon;
    post.matrix = Tensor({k, n_classes});
    for (int c = 0; c < k; ++c) {
        const double denom = static_cast<double>(n_classes) * epsilon + mass[static_cast<std::size_t>(c)];
        if (denom == 0.0) {
            throw NumericError("fit_posterior: cluster " + std::to_string(c) +
                               " has zero soft mass and epsilon is zero");
        }
        for (int y = 0; y < n_classes; ++y) {
            post.matrix.at(c, y) = static_cast<float>(
                (epsilon + counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(y)]) / denom);
        }
    }
    return post;
}

Tensor predict_from_assignment(const SoftAssignment& q, const EmpiricalPosterior& posterior) {
    const int n = q.q.rows();
    const int k = q.q.cols();
    if (posterior.matrix.rows() != k) {
        throw ShapeError("posterior has " + std::to_string(posterior.matrix.rows()) + " clusters, assignment " +
                         std::to_string(k));
    }
    const int classes = posterior.matrix.cols();
    Tensor out({n, classes});
    for (int i = 0; i < n; ++i) {
        const float* qi = q.q.row(i);
        float* oi = out.row(i);
        for (int y = 0; y < classes; ++y) {
            double acc = 0.0;
            for (int c = 0; c < k; ++c) {
                acc += static_cast<double>(qi[c]) * static_cast<double>(posterior.matrix.at(c, y));
            }
            oi[y] = static_cast<float>(acc);
        }
    }
    return out;
}

Tensor layer_predict(const LayerSurrogate& surrogate, const Tensor& activations) {
    const Tensor z = encode(surrogate.cluster_model.encoder, activations);
    const SoftAssignment q = soft_assign(z, surrogate.cluster_model.centroids, surrogate.cluster_model.config.alpha);
    return predict_from_assignment(q, surrogate.posterior);
}

void FullSurrogate::validate() const {
    if (layers.empty()) throw ConfigError("full surrogate has no layers");
    if (weights.size() != layers.size()) {
        throw ConfigError("surrogate has " + std::to_string(layers.size()) + " layers but " +
                          std::to_string(weights.size()) + " weights");
    }
    double total = 0.0;
    for (const double w : weights) {
        if (w < 0.0) throw ConfigError("layer weights must be non-negative");
        total += w;
    }
    if (total <= 0.0) throw ConfigError("layer weights must not be all zero");
}

Tensor full_predict(const FullSurrogate& surrogate, const std::vector<Tensor>& per_layer_activations) {
    surrogate.validate();
    if (per_layer_activations.size() != surrogate.layers.size()) {
        throw ShapeError("full_predict: " + std::to_string(per_layer_activations.size()) +
                         " activation blocks for " + std::to_string(surrogate.layers.size()) + " layers");
    }
    double total = 0.0;
    for (const double w : surrogate.weights) total += w;

    Tensor out;
    for (std::size_t j = 0; j < surrogate.layers.size(); ++j) {
        const double w = surrogate.weights[j] / total;
        const Tensor pred = layer_predict(surrogate.layers[j], per_layer_activations[j]);
        if (j == 0) {
            out = Tensor(pred.shape);
        } else if (pred.shape != out.shape) {
            throw ShapeError("full_predict: layer prediction shapes disagree");
        }
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            out.data[i] = static_cast<float>(static_cast<double>(out.data[i]) +
                                             w * static_cast<double>(pred.data[i]));
        }
    }
    return out;
}

std::vector<int> argmax_rows(const Tensor& proba) {
    std::vector<int> out(static_cast<std::size_t>(proba.rows()));
    for (int i = 0; i < proba.rows(); ++i) {
        const float* row = proba.row(i);
        int best = 0;
        for (int c = 1; c < proba.cols(); ++c) {
            if (row[c] > row[best]) best = c;
        }
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

EvalReport metrics_from_predictions(const std::vector<int>& surrogate_pred, const std::vector<int>& labels,
                                    const std::vector<int>& baseline_pred, int n_classes) {
    if (surrogate_pred.size() != labels.size() || surrogate_pred.size() != baseline_pred.size()) {
        throw ShapeError("evaluate: prediction/label lengths differ (" + std::to_string(surrogate_pred.size()) +
                         ", " + std::to_string(labels.size()) + ", " + std::to_string(baseline_pred.size()) + ")");
    }
    EvalReport report;
    report.confusion.assign(static_cast<std::size_t>(n_classes),
                            std::vector<long>(static_cast<std::size_t>(n_classes), 0));
    std::size_t acc_hits = 0;
    std::size_t fid_hits = 0;
    for (std::size_t i = 0; i < surrogate_pred.size(); ++i) {
        if (surrogate_pred[i] == labels[i]) ++acc_hits;
        if (surrogate_pred[i] == baseline_pred[i]) ++fid_hits;
        ++report.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(surrogate_pred[i])];
    }
    const double n = static_cast<double>(surrogate_pred.size());
    report.accuracy = surrogate_pred.empty() ? 0.0 : static_cast<double>(acc_hits) / n;
    report.fidelity = surrogate_pred.empty() ? 0.0 : static_cast<double>(fid_hits) / n;
    return report;
}

EvalReport evaluate(const FullSurrogate& surrogate, const std::vector<Tensor>& per_layer_activations,
                    const LabelArray& labels, const std::vector<int>& baseline_predictions) {
    const Tensor proba = full_predict(surrogate, per_layer_activations);
    if (proba.rows() != labels.count()) {
        throw ShapeError("evaluate: " + std::to_string(proba.rows()) + " predictions for " +
                         std::to_string(labels.count()) + " labels");
    }
    int n_classes = proba.cols();
    return metrics_from_predictions(argmax_rows(proba), labels.values, baseline_predictions, n_classes);
}

}  // namespace actclust
