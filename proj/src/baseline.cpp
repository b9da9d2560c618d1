#include "actclust/baseline.hpp"

#include <cmath>

#include "actclust/errors.hpp"
#include "actclust/rng.hpp"

namespace actclust {

void BaselineConfig::validate(int n_classes) const {
    if (layer_dims.size() < 2) throw ConfigError("layer_dims needs at least input and output");
    for (const int d : layer_dims) {
        if (d <= 0) throw ConfigError("layer_dims must be positive");
    }
    if (layer_dims.back() != n_classes) {
        throw ConfigError("last layer dim " + std::to_string(layer_dims.back()) + " must equal class count " +
                          std::to_string(n_classes));
    }
    if (epochs < 0) throw ConfigError("epochs must be non-negative");
    if (batch_size < 1) throw ConfigError("batch_size must be positive");
    if (!(learning_rate > 0.0f)) throw ConfigError("learning_rate must be positive");
    if (!(momentum >= 0.0f && momentum < 1.0f)) throw ConfigError("momentum must lie in [0, 1)");
    if (selected_layers.empty()) throw ConfigError("selected_layers must not be empty");
    for (const int j : selected_layers) {
        if (j < 1 || j > num_affine()) {
            throw ConfigError("selected layer " + std::to_string(j) + " out of range [1, " +
                              std::to_string(num_affine()) + "]");
        }
    }
}

Network build_mlp(const std::vector<int>& layer_dims) {
    Network net;
    const int n_affine = static_cast<int>(layer_dims.size()) - 1;
    for (int i = 0; i < n_affine; ++i) {
        net.layers.push_back(LayerSpec::affine(layer_dims[static_cast<std::size_t>(i)],
                                               layer_dims[static_cast<std::size_t>(i) + 1]));
        if (i + 1 < n_affine) net.layers.push_back(LayerSpec::relu(layer_dims[static_cast<std::size_t>(i) + 1]));
    }
    return net;
}

TrainedBaseline train_baseline(const BaselineConfig& cfg, const Dataset& data) {
    cfg.validate(data.n_classes());
    if (data.train_x.cols() != cfg.layer_dims.front()) {
        throw ShapeError("train data dim " + std::to_string(data.train_x.cols()) +
                         " does not match input dim " + std::to_string(cfg.layer_dims.front()));
    }

    TrainedBaseline result;
    result.network = build_mlp(cfg.layer_dims);
    init_params(result.network, derive_seed(cfg.seed, "baseline-init"));

    const int n = data.train_x.rows();
    OptState opt = OptState::for_network(result.network, cfg.learning_rate, cfg.momentum);
    Rng shuffle_rng(derive_seed(cfg.seed, "baseline-shuffle"));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<int> order(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        int batches = 0;
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int end = std::min(n, start + cfg.batch_size);
            const std::vector<int> idx(order.begin() + start, order.begin() + end);
            const Tensor batch = gather_rows(data.train_x, idx);
            std::vector<int> labels(static_cast<std::size_t>(end - start));
            for (int i = start; i < end; ++i) {
                labels[static_cast<std::size_t>(i - start)] =
                    data.train_y.values[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
            }

            ForwardCache cache;
            const Tensor logits = forward(result.network, batch, &cache);
            const XentResult xent = softmax_xent(logits, labels);
            if (!std::isfinite(xent.loss)) {
                throw NumericError("baseline training diverged at epoch " + std::to_string(epoch));
            }
            epoch_loss += xent.loss;
            ++batches;
            sgd_step(result.network, backprop(result.network, cache, xent.grad), opt);
        }
        result.loss_curve.push_back(batches > 0 ? epoch_loss / batches : 0.0);
    }

    result.train_accuracy = accuracy(predict_class(result.network, data.train_x), data.train_y.values);
    result.test_accuracy = accuracy(predict_class(result.network, data.test_x), data.test_y.values);
    result.checksum = param_checksum(result.network);
    return result;
}

Tensor predict_proba(const Network& net, const Tensor& x) {
    return softmax_rows(forward(net, x));
}

std::vector<int> predict_class(const Network& net, const Tensor& x) {
    const Tensor logits = forward(net, x);
    std::vector<int> out(static_cast<std::size_t>(logits.rows()));
    for (int i = 0; i < logits.rows(); ++i) {
        const float* row = logits.row(i);
        int best = 0;
        for (int c = 1; c < logits.cols(); ++c) {
            if (row[c] > row[best]) best = c;
        }
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) {
        throw ShapeError("accuracy: " + std::to_string(predicted.size()) + " predictions vs " +
                         std::to_string(truth.size()) + " labels");
    }
    if (predicted.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == truth[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

namespace {

// Maps activation index j to the index one past its producing layer in the
// layer list: affine j is followed by a relu except for the last affine.
std::size_t layer_offset_for_activation(const Network& net, int activation_index) {
    int n_affine = 0;
    for (const LayerSpec& l : net.layers) {
        if (l.kind == LayerKind::Affine) ++n_affine;
    }
    if (activation_index < 0 || activation_index > n_affine) {
        throw IndexError("activation index " + std::to_string(activation_index) + " out of range [0, " +
                         std::to_string(n_affine) + "]");
    }
    if (activation_index == 0) return 0;
    int seen = 0;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        if (net.layers[li].kind == LayerKind::Affine) {
            ++seen;
            if (seen == activation_index) {
                const bool has_relu = li + 1 < net.layers.size() && net.layers[li + 1].kind == LayerKind::Relu;
                return li + (has_relu ? 2 : 1);
            }
        }
    }
    throw IndexError("activation index " + std::to_string(activation_index) + " not found");
}

}  // namespace

std::string activation_name(int activation_index) {
    return "layer" + std::to_string(activation_index);
}

std::vector<ActivationDump> extract_activations(const Network& net, const Tensor& x,
                                                const std::vector<int>& selected_layers) {
    ForwardCache cache;
    forward(net, x, &cache);
    std::vector<ActivationDump> dumps;
    dumps.reserve(selected_layers.size());
    for (const int j : selected_layers) {
        const std::size_t offset = layer_offset_for_activation(net, j);
        dumps.push_back(ActivationDump::from_tensor(activation_name(j), cache.activations[offset]));
    }
    return dumps;
}

Tensor replay_from_activation(const Network& net, int activation_index, const Tensor& activations) {
    const std::size_t offset = layer_offset_for_activation(net, activation_index);
    Network tail;
    tail.rng_seed = net.rng_seed;
    for (std::size_t li = offset; li < net.layers.size(); ++li) tail.layers.push_back(net.layers[li]);
    if (tail.layers.empty()) return softmax_rows(activations);
    return softmax_rows(forward(tail, activations));
}

}  // namespace actclust
