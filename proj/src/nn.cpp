#include "actclust/nn.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "actclust/errors.hpp"
#include "actclust/rng.hpp"

namespace actclust {

LayerSpec LayerSpec::affine(int in_dim, int out_dim) {
    LayerSpec s;
    s.kind = LayerKind::Affine;
    s.in_dim = in_dim;
    s.out_dim = out_dim;
    s.weight = Tensor({out_dim, in_dim});
    s.bias = Tensor({out_dim});
    return s;
}

LayerSpec LayerSpec::relu(int dim) {
    LayerSpec s;
    s.kind = LayerKind::Relu;
    s.in_dim = dim;
    s.out_dim = dim;
    return s;
}

LayerSpec LayerSpec::sphere(int dim, float radius) {
    LayerSpec s;
    s.kind = LayerKind::SphereProject;
    s.in_dim = dim;
    s.out_dim = dim;
    s.radius = radius;
    return s;
}

void LayerSpec::validate() const {
    if (in_dim <= 0 || out_dim <= 0) throw ShapeError("layer dims must be positive");
    switch (kind) {
        case LayerKind::Affine:
            require_shape(weight, {out_dim, in_dim}, "affine weight");
            require_shape(bias, {out_dim}, "affine bias");
            break;
        case LayerKind::Relu:
            if (in_dim != out_dim) throw ShapeError("relu requires in_dim == out_dim");
            break;
        case LayerKind::SphereProject:
            if (in_dim != out_dim) throw ShapeError("sphere-project requires in_dim == out_dim");
            if (!(radius > 0.0f)) throw ShapeError("sphere-project radius must be positive");
            break;
    }
}

void Network::validate() const {
    if (layers.empty()) throw ShapeError("network has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].validate();
        if (i > 0 && layers[i - 1].out_dim != layers[i].in_dim) {
            throw ShapeError("layer " + std::to_string(i - 1) + " out_dim " +
                             std::to_string(layers[i - 1].out_dim) + " does not chain into layer " +
                             std::to_string(i) + " in_dim " + std::to_string(layers[i].in_dim));
        }
    }
}

int Network::input_dim() const {
    if (layers.empty()) throw ShapeError("network has no layers");
    return layers.front().in_dim;
}

int Network::output_dim() const {
    if (layers.empty()) throw ShapeError("network has no layers");
    return layers.back().out_dim;
}

Tensor affine_forward(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    const int batch = x.rows();
    const int in_dim = x.cols();
    if (weight.rank() != 2 || weight.cols() != in_dim) {
        throw ShapeError("affine: weight shape " + shape_str(weight.shape) + " does not match input shape " +
                         shape_str(x.shape));
    }
    const int out_dim = weight.rows();
    if (bias.rank() != 1 || bias.shape[0] != out_dim) {
        throw ShapeError("affine: bias shape " + shape_str(bias.shape) + " does not match weight shape " +
                         shape_str(weight.shape));
    }

    Tensor y({batch, out_dim});
    for (int b = 0; b < batch; ++b) {
        const float* xi = x.row(b);
        float* yi = y.row(b);
        for (int o = 0; o < out_dim; ++o) {
            const float* wo = weight.row(o);
            float acc = bias.data[static_cast<std::size_t>(o)];
            for (int i = 0; i < in_dim; ++i) acc += wo[i] * xi[i];
            yi[o] = acc;
        }
    }
    return y;
}

Tensor relu_forward(const Tensor& x) {
    Tensor y = x;
    for (float& v : y.data) v = v > 0.0f ? v : 0.0f;
    return y;
}

Tensor sphere_project(const Tensor& u, float radius) {
    const int batch = u.rows();
    const int dim = u.cols();
    Tensor z({batch, dim});
    for (int b = 0; b < batch; ++b) {
        const float* ub = u.row(b);
        double norm_sq = 0.0;
        for (int j = 0; j < dim; ++j) norm_sq += static_cast<double>(ub[j]) * static_cast<double>(ub[j]);
        if (norm_sq == 0.0) {
            throw NumericError("sphere_project: zero-norm row " + std::to_string(b));
        }
        const float scale = static_cast<float>(static_cast<double>(radius) / std::sqrt(norm_sq));
        float* zb = z.row(b);
        for (int j = 0; j < dim; ++j) zb[j] = ub[j] * scale;
    }
    return z;
}

Tensor forward(const Network& net, const Tensor& x, ForwardCache* cache) {
    net.validate();
    if (x.cols() != net.input_dim()) {
        throw ShapeError("forward: input shape " + shape_str(x.shape) + " does not match network input dim " +
                         std::to_string(net.input_dim()));
    }
    if (cache) {
        cache->activations.clear();
        cache->activations.reserve(net.layers.size() + 1);
        cache->activations.push_back(x);
    }
    Tensor cur = x;
    for (const LayerSpec& layer : net.layers) {
        switch (layer.kind) {
            case LayerKind::Affine:
                cur = affine_forward(cur, layer.weight, layer.bias);
                break;
            case LayerKind::Relu:
                cur = relu_forward(cur);
                break;
            case LayerKind::SphereProject:
                cur = sphere_project(cur, layer.radius);
                break;
        }
        if (cache) cache->activations.push_back(cur);
    }
    return cur;
}

Gradients backprop(const Network& net, const ForwardCache& cache, const Tensor& upstream) {
    net.validate();
    const std::size_t n_layers = net.layers.size();
    if (cache.activations.size() != n_layers + 1) {
        throw StateError("backprop: forward cache missing or stale (" +
                         std::to_string(cache.activations.size()) + " activations for " +
                         std::to_string(n_layers) + " layers)");
    }
    const int batch = cache.activations.front().rows();
    require_shape(upstream, {batch, net.output_dim()}, "backprop upstream");

    Gradients grads;
    grads.layers.resize(n_layers);

    Tensor g = upstream;
    for (std::size_t li = n_layers; li-- > 0;) {
        const LayerSpec& layer = net.layers[li];
        const Tensor& in = cache.activations[li];
        require_shape(g, {batch, layer.out_dim}, "backprop gradient");

        switch (layer.kind) {
            case LayerKind::Affine: {
                Tensor dw({layer.out_dim, layer.in_dim});
                Tensor db({layer.out_dim});
                Tensor dx({batch, layer.in_dim});
                for (int b = 0; b < batch; ++b) {
                    const float* xb = in.row(b);
                    const float* gb = g.row(b);
                    float* dxb = dx.row(b);
                    for (int o = 0; o < layer.out_dim; ++o) {
                        const float go = gb[o];
                        if (go == 0.0f) continue;
                        db.data[static_cast<std::size_t>(o)] += go;
                        float* dwo = dw.row(o);
                        const float* wo = layer.weight.row(o);
                        for (int i = 0; i < layer.in_dim; ++i) {
                            dwo[i] += go * xb[i];
                            dxb[i] += go * wo[i];
                        }
                    }
                }
                grads.layers[li].weight = std::move(dw);
                grads.layers[li].bias = std::move(db);
                g = std::move(dx);
                break;
            }
            case LayerKind::Relu: {
                Tensor dx = g;
                for (std::size_t i = 0; i < dx.data.size(); ++i) {
                    if (in.data[i] <= 0.0f) dx.data[i] = 0.0f;
                }
                g = std::move(dx);
                break;
            }
            case LayerKind::SphereProject: {
                // d/du [R u / |u|] = R (I / |u| - u u^T / |u|^3)
                const int dim = layer.in_dim;
                Tensor dx({batch, dim});
                for (int b = 0; b < batch; ++b) {
                    const float* ub = in.row(b);
                    const float* gb = g.row(b);
                    double norm_sq = 0.0;
                    double dot = 0.0;
                    for (int j = 0; j < dim; ++j) {
                        norm_sq += static_cast<double>(ub[j]) * static_cast<double>(ub[j]);
                        dot += static_cast<double>(ub[j]) * static_cast<double>(gb[j]);
                    }
                    if (norm_sq == 0.0) {
                        throw NumericError("sphere_project backward: zero-norm row " + std::to_string(b));
                    }
                    const double norm = std::sqrt(norm_sq);
                    const double inv = static_cast<double>(layer.radius) / norm;
                    const double coef = static_cast<double>(layer.radius) * dot / (norm * norm_sq);
                    float* dxb = dx.row(b);
                    for (int j = 0; j < dim; ++j) {
                        dxb[j] = static_cast<float>(inv * static_cast<double>(gb[j]) -
                                                    coef * static_cast<double>(ub[j]));
                    }
                }
                g = std::move(dx);
                break;
            }
        }
    }
    grads.input = std::move(g);
    return grads;
}

Tensor softmax_rows(const Tensor& logits) {
    const int batch = logits.rows();
    const int classes = logits.cols();
    Tensor out({batch, classes});
    for (int b = 0; b < batch; ++b) {
        const float* lb = logits.row(b);
        double mx = lb[0];
        for (int c = 1; c < classes; ++c) mx = std::max(mx, static_cast<double>(lb[c]));
        double sum = 0.0;
        for (int c = 0; c < classes; ++c) sum += std::exp(static_cast<double>(lb[c]) - mx);
        const double lse = mx + std::log(sum);
        float* ob = out.row(b);
        for (int c = 0; c < classes; ++c) {
            ob[c] = static_cast<float>(std::exp(static_cast<double>(lb[c]) - lse));
        }
    }
    return out;
}

XentResult softmax_xent(const Tensor& logits, const std::vector<int>& labels) {
    const int batch = logits.rows();
    const int classes = logits.cols();
    if (static_cast<int>(labels.size()) != batch) {
        throw ShapeError("softmax_xent: " + std::to_string(labels.size()) + " labels for batch of " +
                         std::to_string(batch));
    }
    XentResult res;
    res.grad = Tensor({batch, classes});
    double total = 0.0;
    const float inv_batch = 1.0f / static_cast<float>(batch);
    for (int b = 0; b < batch; ++b) {
        const int y = labels[static_cast<std::size_t>(b)];
        if (y < 0 || y >= classes) {
            throw IndexError("softmax_xent: label " + std::to_string(y) + " out of range [0, " +
                             std::to_string(classes) + ")");
        }
        const float* lb = logits.row(b);
        double mx = lb[0];
        for (int c = 1; c < classes; ++c) mx = std::max(mx, static_cast<double>(lb[c]));
        double sum = 0.0;
        for (int c = 0; c < classes; ++c) sum += std::exp(static_cast<double>(lb[c]) - mx);
        const double lse = mx + std::log(sum);
        total += lse - static_cast<double>(lb[y]);
        float* gb = res.grad.row(b);
        for (int c = 0; c < classes; ++c) {
            const double p = std::exp(static_cast<double>(lb[c]) - lse);
            gb[c] = (static_cast<float>(p) - (c == y ? 1.0f : 0.0f)) * inv_batch;
        }
    }
    res.loss = total / static_cast<double>(batch);
    return res;
}

OptState OptState::for_network(const Network& net, float learning_rate, float momentum) {
    OptState opt;
    opt.learning_rate = learning_rate;
    opt.momentum = momentum;
    opt.velocity.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (net.layers[i].has_params()) {
            opt.velocity[i].weight = Tensor(net.layers[i].weight.shape);
            opt.velocity[i].bias = Tensor(net.layers[i].bias.shape);
        }
    }
    return opt;
}

static void sgd_update(std::vector<float>& param, const std::vector<float>& grad, std::vector<float>& vel,
                       float lr, float momentum) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        vel[i] = momentum * vel[i] - lr * grad[i];
        param[i] += vel[i];
    }
}

void sgd_step(Network& net, const Gradients& grads, OptState& opt) {
    if (grads.layers.size() != net.layers.size() || opt.velocity.size() != net.layers.size()) {
        throw ShapeError("sgd_step: gradient/velocity layer count does not match network");
    }
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        LayerSpec& layer = net.layers[i];
        if (!layer.has_params()) continue;
        const LayerGrads& g = grads.layers[i];
        LayerGrads& v = opt.velocity[i];
        if (g.weight.shape != layer.weight.shape || g.bias.shape != layer.bias.shape) {
            throw ShapeError("sgd_step: gradient shape mismatch at layer " + std::to_string(i));
        }
        sgd_update(layer.weight.data, g.weight.data, v.weight.data, opt.learning_rate, opt.momentum);
        sgd_update(layer.bias.data, g.bias.data, v.bias.data, opt.learning_rate, opt.momentum);
    }
}

void init_params(Network& net, std::uint64_t seed) {
    Rng rng(seed);
    for (LayerSpec& layer : net.layers) {
        if (!layer.has_params()) continue;
        const double bound = std::sqrt(6.0 / static_cast<double>(layer.in_dim + layer.out_dim));
        for (float& w : layer.weight.data) {
            w = static_cast<float>(bound * (2.0 * rng.uniform() - 1.0));
        }
        for (float& b : layer.bias.data) b = 0.0f;
    }
    net.rng_seed = seed;
}

std::uint64_t param_checksum(const Network& net) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::vector<float>& v) {
        for (const float f : v) {
            std::uint32_t bits;
            std::memcpy(&bits, &f, sizeof(bits));
            for (int byte = 0; byte < 4; ++byte) {
                h ^= (bits >> (8 * byte)) & 0xffu;
                h *= 1099511628211ull;
            }
        }
    };
    for (const LayerSpec& layer : net.layers) {
        if (!layer.has_params()) continue;
        mix(layer.weight.data);
        mix(layer.bias.data);
    }
    return h;
}

}  // namespace actclust
