#include "actclust/gradcheck.hpp"

#include <cmath>
#include <limits>

#include "actclust/errors.hpp"

namespace actclust {

namespace {

using Mat = std::vector<std::vector<double>>;

Mat to_mat(const Tensor& t) {
    Mat m(static_cast<std::size_t>(t.rows()), std::vector<double>(static_cast<std::size_t>(t.cols())));
    for (int i = 0; i < t.rows(); ++i) {
        for (int j = 0; j < t.cols(); ++j) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = t.at(i, j);
    }
    return m;
}

// Forward pass in doubles. Parameters are taken from `params` (flat copies of
// each layer's weight then bias), so a perturbed evaluation never touches the
// float32 network.
Mat forward_double(const Network& net, const Mat& x, const std::vector<std::vector<double>>& params) {
    Mat cur = x;
    std::size_t pi = 0;
    for (const LayerSpec& layer : net.layers) {
        switch (layer.kind) {
            case LayerKind::Affine: {
                const std::vector<double>& flat = params[pi++];
                const std::size_t wn = static_cast<std::size_t>(layer.out_dim) * static_cast<std::size_t>(layer.in_dim);
                Mat next(cur.size(), std::vector<double>(static_cast<std::size_t>(layer.out_dim)));
                for (std::size_t b = 0; b < cur.size(); ++b) {
                    for (int o = 0; o < layer.out_dim; ++o) {
                        double acc = flat[wn + static_cast<std::size_t>(o)];
                        const std::size_t base = static_cast<std::size_t>(o) * static_cast<std::size_t>(layer.in_dim);
                        for (int i = 0; i < layer.in_dim; ++i) {
                            acc += flat[base + static_cast<std::size_t>(i)] * cur[b][static_cast<std::size_t>(i)];
                        }
                        next[b][static_cast<std::size_t>(o)] = acc;
                    }
                }
                cur = std::move(next);
                break;
            }
            case LayerKind::Relu: {
                for (auto& row : cur) {
                    for (double& v : row) v = v > 0.0 ? v : 0.0;
                }
                break;
            }
            case LayerKind::SphereProject: {
                for (auto& row : cur) {
                    double norm_sq = 0.0;
                    for (const double v : row) norm_sq += v * v;
                    const double scale = static_cast<double>(layer.radius) / std::sqrt(norm_sq);
                    for (double& v : row) v *= scale;
                }
                break;
            }
        }
    }
    return cur;
}

double xent_double(const Mat& logits, const std::vector<int>& labels) {
    double total = 0.0;
    for (std::size_t b = 0; b < logits.size(); ++b) {
        const auto& row = logits[b];
        double mx = row[0];
        for (const double v : row) mx = std::max(mx, v);
        double sum = 0.0;
        for (const double v : row) sum += std::exp(v - mx);
        total += mx + std::log(sum) - row[static_cast<std::size_t>(labels[b])];
    }
    return total / static_cast<double>(logits.size());
}

std::vector<std::vector<double>> flat_params(const Network& net) {
    std::vector<std::vector<double>> params;
    for (const LayerSpec& layer : net.layers) {
        if (!layer.has_params()) continue;
        std::vector<double> flat;
        flat.reserve(layer.weight.data.size() + layer.bias.data.size());
        for (const float v : layer.weight.data) flat.push_back(v);
        for (const float v : layer.bias.data) flat.push_back(v);
        params.push_back(std::move(flat));
    }
    return params;
}

}  // namespace

double guarded_rel_err(double a, double b, double scale_floor) {
    const double denom = std::max({std::fabs(a), std::fabs(b), scale_floor});
    return std::fabs(a - b) / denom;
}

double loss_fd(const Network& net, const Tensor& x, const std::vector<int>& labels) {
    return xent_double(forward_double(net, to_mat(x), flat_params(net)), labels);
}

double min_relu_margin(const Network& net, const Tensor& x) {
    ForwardCache cache;
    forward(net, x, &cache);
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        if (net.layers[li].kind != LayerKind::Relu) continue;
        for (const float v : cache.activations[li].data) {
            margin = std::min(margin, std::fabs(static_cast<double>(v)));
        }
    }
    return margin;
}

GradCheckReport check_network_gradients(const Network& net, const Tensor& x, const std::vector<int>& labels,
                                        double eps) {
    ForwardCache cache;
    const Tensor logits = forward(net, x, &cache);
    const XentResult xent = softmax_xent(logits, labels);
    const Gradients analytic = backprop(net, cache, xent.grad);

    GradCheckReport report;
    const Mat xd = to_mat(x);
    std::vector<std::vector<double>> params = flat_params(net);

    // Parameter gradients.
    std::size_t pi = 0;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const LayerSpec& layer = net.layers[li];
        if (!layer.has_params()) continue;
        std::vector<double>& flat = params[pi];
        const std::size_t wn = layer.weight.data.size();
        for (std::size_t k = 0; k < flat.size(); ++k) {
            const double saved = flat[k];
            flat[k] = saved + eps;
            const double lp = xent_double(forward_double(net, xd, params), labels);
            flat[k] = saved - eps;
            const double lm = xent_double(forward_double(net, xd, params), labels);
            flat[k] = saved;
            const double numeric = (lp - lm) / (2.0 * eps);
            const double a = k < wn ? analytic.layers[li].weight.data[k] : analytic.layers[li].bias.data[k - wn];
            report.max_rel_err = std::max(report.max_rel_err, guarded_rel_err(a, numeric));
            ++report.checks;
        }
        ++pi;
    }

    // Input gradients.
    Mat xp = xd;
    for (std::size_t b = 0; b < xp.size(); ++b) {
        for (std::size_t j = 0; j < xp[b].size(); ++j) {
            const double saved = xp[b][j];
            xp[b][j] = saved + eps;
            const double lp = xent_double(forward_double(net, xp, params), labels);
            xp[b][j] = saved - eps;
            const double lm = xent_double(forward_double(net, xp, params), labels);
            xp[b][j] = saved;
            const double numeric = (lp - lm) / (2.0 * eps);
            const double a = analytic.input.at(static_cast<int>(b), static_cast<int>(j));
            report.max_rel_err = std::max(report.max_rel_err, guarded_rel_err(a, numeric));
            ++report.checks;
        }
    }
    return report;
}

}  // namespace actclust
