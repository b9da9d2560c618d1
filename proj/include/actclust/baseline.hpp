#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "actclust/nn.hpp"
#include "actclust/store.hpp"

namespace actclust {

struct BaselineConfig {
    std::vector<int> layer_dims;  // input, hidden..., n_classes
    int epochs = 20;
    int batch_size = 64;
    float learning_rate = 0.1f;
    float momentum = 0.9f;
    std::uint64_t seed = 0;
    // Activation indices to export: index j is the output of the j-th affine
    // layer (after its relu, when present); index 0 is the raw input and is
    // not a valid selection here.
    std::vector<int> selected_layers;

    int num_affine() const { return static_cast<int>(layer_dims.size()) - 1; }
    void validate(int n_classes) const;
};

struct TrainedBaseline {
    Network network;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::vector<double> loss_curve;  // mean epoch loss
    std::uint64_t checksum = 0;      // parameter checksum after training
};

// Builds the MLP (affine+relu pairs, final affine producing logits) and runs
// minibatch SGD with momentum over softmax cross-entropy. Deterministic for a
// given config and seed.
TrainedBaseline train_baseline(const BaselineConfig& cfg, const Dataset& data);

Network build_mlp(const std::vector<int>& layer_dims);

// Rows sum to 1.
Tensor predict_proba(const Network& net, const Tensor& x);

// Row argmax of predict_proba, ties broken by lowest class index.
std::vector<int> predict_class(const Network& net, const Tensor& x);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

// One dump per selected activation index, sample order preserved. Index 0
// returns the input itself.
std::vector<ActivationDump> extract_activations(const Network& net, const Tensor& x,
                                                const std::vector<int>& selected_layers);

// Runs the layers after activation index j on a tensor of layer-j activations;
// used to check that exported activations reproduce the model's outputs.
Tensor replay_from_activation(const Network& net, int activation_index, const Tensor& activations);

// Stable name for activation index j, used for dump files and cluster models.
std::string activation_name(int activation_index);

}  // namespace actclust
