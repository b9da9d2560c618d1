#pragma once

#include <cstdint>
#include <vector>

#include "actclust/tensor.hpp"

namespace actclust {

enum class LayerKind { Affine, Relu, SphereProject };

struct LayerSpec {
    LayerKind kind = LayerKind::Affine;
    int in_dim = 0;
    int out_dim = 0;
    Tensor weight;        // affine: [out_dim, in_dim]
    Tensor bias;          // affine: [out_dim]
    float radius = 0.0f;  // sphere-project only

    static LayerSpec affine(int in_dim, int out_dim);
    static LayerSpec relu(int dim);
    static LayerSpec sphere(int dim, float radius);

    bool has_params() const { return kind == LayerKind::Affine; }
    void validate() const;
};

struct Network {
    std::vector<LayerSpec> layers;
    std::uint64_t rng_seed = 0;

    // Adjacent layer dims must chain.
    void validate() const;
    int input_dim() const;
    int output_dim() const;
};

// --- layer primitives ---

// y[i] = W x[i] + b for each batch row.
Tensor affine_forward(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor relu_forward(const Tensor& x);

// Scales each row of u onto the radius-R hypersphere: z_i = R u_i / |u_i|.
// A zero-norm row is a degenerate input.
Tensor sphere_project(const Tensor& u, float radius);

// --- full-network forward / backward ---

// Holds the input plus every layer output, in order. Required by backprop.
struct ForwardCache {
    std::vector<Tensor> activations;  // activations[0] = input, activations[i+1] = layer i output
};

Tensor forward(const Network& net, const Tensor& x, ForwardCache* cache = nullptr);

struct LayerGrads {
    Tensor weight;  // empty for parameter-free layers
    Tensor bias;
};

struct Gradients {
    std::vector<LayerGrads> layers;
    Tensor input;
};

// Reverse-mode gradients through every layer. `cache` must come from a
// forward() call on the same network and input.
Gradients backprop(const Network& net, const ForwardCache& cache, const Tensor& upstream);

// --- loss ---

struct XentResult {
    double loss = 0.0;          // mean cross-entropy over the batch
    Tensor grad;                // d loss / d logits, [batch, C]
};

// Log-sum-exp stabilized softmax cross-entropy; grad = (softmax - onehot) / batch.
XentResult softmax_xent(const Tensor& logits, const std::vector<int>& labels);

// Row-wise softmax (stabilized), rows sum to 1.
Tensor softmax_rows(const Tensor& logits);

// --- optimizer ---

struct OptState {
    float learning_rate = 0.01f;
    float momentum = 0.0f;
    std::vector<LayerGrads> velocity;  // mirrors parameter shapes

    static OptState for_network(const Network& net, float learning_rate, float momentum);
};

// v <- momentum * v - lr * g;  p <- p + v
void sgd_step(Network& net, const Gradients& grads, OptState& opt);

// Glorot-uniform weights in +-sqrt(6 / (in + out)), zero biases. Deterministic
// for a given seed; records the seed on the network.
void init_params(Network& net, std::uint64_t seed);

// FNV-1a over all parameter bytes, layer order.
std::uint64_t param_checksum(const Network& net);

}  // namespace actclust
