#include "actclust/dec.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "actclust/errors.hpp"
#include "actclust/kmeans.hpp"
#include "actclust/rng.hpp"

namespace actclust {

void DECConfig::validate() const {
    if (embedding_dim < 2) throw ConfigError("embedding_dim must be >= 2");
    if (n_clusters < 2) throw ConfigError("n_clusters must be >= 2");
    if (!(alpha > 0.0f)) throw ConfigError("alpha must be positive");
    if (!(radius > 0.0f)) throw ConfigError("radius must be positive");
    if (!(assignment_change_tol > 0.0 && assignment_change_tol < 1.0)) {
        throw ConfigError("assignment_change_tol must lie in (0, 1)");
    }
    if (hidden_dim < 1) throw ConfigError("hidden_dim must be positive");
    if (ae_epochs < 0 || dec_max_epochs < 0) throw ConfigError("epoch counts must be non-negative");
    if (kmeans_restarts < 1) throw ConfigError("kmeans_restarts must be positive");
    if (!(learning_rate > 0.0f)) throw ConfigError("learning_rate must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be positive");
}

namespace {

// Mean squared error over all entries plus its gradient wrt the reconstruction.
double mse_with_grad(const Tensor& recon, const Tensor& target, Tensor& grad) {
    double total = 0.0;
    const float scale = 2.0f / static_cast<float>(recon.size());
    for (std::size_t i = 0; i < recon.data.size(); ++i) {
        const double d = static_cast<double>(recon.data[i]) - static_cast<double>(target.data[i]);
        total += d * d;
        grad.data[i] = static_cast<float>(d) * scale;
    }
    return total / static_cast<double>(recon.size());
}

double mse_only(const Network& net, const Tensor& x) {
    const Tensor recon = forward(net, x);
    double total = 0.0;
    for (std::size_t i = 0; i < recon.data.size(); ++i) {
        const double d = static_cast<double>(recon.data[i]) - static_cast<double>(x.data[i]);
        total += d * d;
    }
    return total / static_cast<double>(recon.size());
}

std::vector<int> batch_order(int n, Rng& rng) {
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);
    return order;
}

// Double-precision soft assignment of one embedding row; returns the row plus
// the per-cluster kernel denominators s_k = 1 + d^2/alpha needed by gradients.
void soft_assign_row(const float* z, const Tensor& centroids, double alpha, std::vector<double>& q_row,
                     std::vector<double>& s_row) {
    const int k = centroids.rows();
    const int dim = centroids.cols();
    const double expo = -(alpha + 1.0) / 2.0;
    double mx = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
        const double d2 = sq_dist(z, centroids.row(c), dim);
        s_row[static_cast<std::size_t>(c)] = 1.0 + d2 / alpha;
        q_row[static_cast<std::size_t>(c)] = expo * std::log1p(d2 / alpha);  // log kernel
        mx = std::max(mx, q_row[static_cast<std::size_t>(c)]);
    }
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
        q_row[static_cast<std::size_t>(c)] = std::exp(q_row[static_cast<std::size_t>(c)] - mx);
        sum += q_row[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) q_row[static_cast<std::size_t>(c)] /= sum;
}

}  // namespace

AutoencoderResult pretrain_autoencoder(const ActivationDump& dump, const DECConfig& cfg) {
    cfg.validate();
    const int n = dump.n_samples;
    const int f = dump.feature_dim;
    if (f < cfg.embedding_dim) {
        throw ConfigError("feature_dim " + std::to_string(f) + " is smaller than embedding_dim " +
                          std::to_string(cfg.embedding_dim));
    }
    if (n <= cfg.n_clusters) {
        throw ConfigError("need more than n_clusters=" + std::to_string(cfg.n_clusters) + " samples, got " +
                          std::to_string(n));
    }

    Network ae;
    ae.layers.push_back(LayerSpec::affine(f, cfg.hidden_dim));
    ae.layers.push_back(LayerSpec::relu(cfg.hidden_dim));
    ae.layers.push_back(LayerSpec::affine(cfg.hidden_dim, cfg.embedding_dim));
    ae.layers.push_back(LayerSpec::sphere(cfg.embedding_dim, cfg.radius));
    ae.layers.push_back(LayerSpec::affine(cfg.embedding_dim, cfg.hidden_dim));
    ae.layers.push_back(LayerSpec::relu(cfg.hidden_dim));
    ae.layers.push_back(LayerSpec::affine(cfg.hidden_dim, f));
    init_params(ae, derive_seed(cfg.seed, "ae-init"));

    AutoencoderResult res;
    res.initial_loss = mse_only(ae, dump.data);

    OptState opt = OptState::for_network(ae, cfg.learning_rate, cfg.momentum);
    Rng shuffle_rng(derive_seed(cfg.seed, "ae-shuffle"));
    for (int epoch = 0; epoch < cfg.ae_epochs; ++epoch) {
        const std::vector<int> order = batch_order(n, shuffle_rng);
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int end = std::min(n, start + cfg.batch_size);
            const std::vector<int> idx(order.begin() + start, order.begin() + end);
            const Tensor batch = gather_rows(dump.data, idx);

            ForwardCache cache;
            const Tensor recon = forward(ae, batch, &cache);
            Tensor grad(recon.shape);
            const double loss = mse_with_grad(recon, batch, grad);
            if (!std::isfinite(loss)) {
                throw NumericError("autoencoder training diverged at epoch " + std::to_string(epoch));
            }
            sgd_step(ae, backprop(ae, cache, grad), opt);
        }
    }
    res.final_loss = mse_only(ae, dump.data);
    if (!std::isfinite(res.final_loss)) {
        throw NumericError("autoencoder training diverged (non-finite reconstruction loss)");
    }

    res.encoder.rng_seed = ae.rng_seed;
    res.decoder.rng_seed = ae.rng_seed;
    for (std::size_t i = 0; i < 4; ++i) res.encoder.layers.push_back(ae.layers[i]);
    for (std::size_t i = 4; i < ae.layers.size(); ++i) res.decoder.layers.push_back(ae.layers[i]);
    return res;
}

Tensor encode(const Network& encoder, const Tensor& x) {
    if (x.cols() != encoder.input_dim()) {
        throw ShapeError("encode: input shape " + shape_str(x.shape) + " does not match encoder input dim " +
                         std::to_string(encoder.input_dim()));
    }
    return forward(encoder, x);
}

Tensor encode(const ClusterModel& model, const ActivationDump& dump) {
    return encode(model.encoder, dump.data);
}

SoftAssignment soft_assign(const Tensor& embeddings, const Tensor& centroids, float alpha) {
    const int n = embeddings.rows();
    const int k = centroids.rows();
    if (embeddings.cols() != centroids.cols()) {
        throw ShapeError("soft_assign: embedding dim " + std::to_string(embeddings.cols()) +
                         " vs centroid dim " + std::to_string(centroids.cols()));
    }
    SoftAssignment sa;
    sa.q = Tensor({n, k});
    std::vector<double> q_row(static_cast<std::size_t>(k));
    std::vector<double> s_row(static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i) {
        soft_assign_row(embeddings.row(i), centroids, static_cast<double>(alpha), q_row, s_row);
        float* out = sa.q.row(i);
        for (int c = 0; c < k; ++c) out[c] = static_cast<float>(q_row[static_cast<std::size_t>(c)]);
    }
    return sa;
}

Tensor target_distribution(const SoftAssignment& assignment) {
    const Tensor& q = assignment.q;
    const int n = q.rows();
    const int k = q.cols();
    std::vector<double> freq(static_cast<std::size_t>(k), 0.0);
    for (int i = 0; i < n; ++i) {
        const float* row = q.row(i);
        for (int c = 0; c < k; ++c) freq[static_cast<std::size_t>(c)] += static_cast<double>(row[c]);
    }
    for (int c = 0; c < k; ++c) {
        if (freq[static_cast<std::size_t>(c)] == 0.0) {
            throw NumericError("target_distribution: cluster " + std::to_string(c) + " has zero soft mass");
        }
    }
    Tensor p({n, k});
    for (int i = 0; i < n; ++i) {
        const float* qi = q.row(i);
        float* pi = p.row(i);
        double sum = 0.0;
        for (int c = 0; c < k; ++c) {
            const double v = static_cast<double>(qi[c]) * static_cast<double>(qi[c]) / freq[static_cast<std::size_t>(c)];
            pi[c] = static_cast<float>(v);
            sum += v;
        }
        const double inv = 1.0 / sum;
        for (int c = 0; c < k; ++c) pi[c] = static_cast<float>(static_cast<double>(pi[c]) * inv);
    }
    return p;
}

double kl_divergence(const Tensor& p, const Tensor& q) {
    if (p.shape != q.shape) {
        throw ShapeError("kl_divergence: shape " + shape_str(p.shape) + " vs " + shape_str(q.shape));
    }
    const int cols = p.cols();
    double total = 0.0;
    for (int i = 0; i < p.rows(); ++i) {
        const float* pi = p.row(i);
        const float* qi = q.row(i);
        double row = 0.0;
        for (int c = 0; c < cols; ++c) {
            const double pv = static_cast<double>(pi[c]);
            if (pv <= 0.0) continue;
            const double qv = std::max(static_cast<double>(qi[c]), 1e-300);
            row += pv * std::log(pv / qv);
        }
        // Per-row KL is non-negative; tiny negative values are float32
        // rounding of near-identical distributions.
        total += std::max(row, 0.0);
    }
    return total / static_cast<double>(p.rows());
}

KLBatch kl_batch(const Tensor& embeddings, const Tensor& centroids, const Tensor& target_rows, float alpha) {
    const int n = embeddings.rows();
    const int dim = embeddings.cols();
    const int k = centroids.rows();
    if (centroids.cols() != dim) {
        throw ShapeError("kl_batch: embedding dim " + std::to_string(dim) + " vs centroid dim " +
                         std::to_string(centroids.cols()));
    }
    require_shape(target_rows, {n, k}, "kl_batch target");

    KLBatch batch;
    batch.d_embeddings = Tensor({n, dim});
    batch.d_centroids = Tensor({k, dim});

    const double a = static_cast<double>(alpha);
    const double grad_coef = (a + 1.0) / a;
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> q_row(static_cast<std::size_t>(k));
    std::vector<double> s_row(static_cast<std::size_t>(k));

    for (int i = 0; i < n; ++i) {
        soft_assign_row(embeddings.row(i), centroids, a, q_row, s_row);
        const float* p_i = target_rows.row(i);
        const float* z_i = embeddings.row(i);
        float* dz_i = batch.d_embeddings.row(i);
        for (int c = 0; c < k; ++c) {
            const double pv = static_cast<double>(p_i[c]);
            const double qv = q_row[static_cast<std::size_t>(c)];
            if (pv > 0.0) batch.kl += pv * std::log(pv / std::max(qv, 1e-300));
            const double w = grad_coef * (pv - qv) / s_row[static_cast<std::size_t>(c)] * inv_n;
            const float* mu = centroids.row(c);
            float* dmu_c = batch.d_centroids.row(c);
            for (int j = 0; j < dim; ++j) {
                const double diff = static_cast<double>(z_i[j]) - static_cast<double>(mu[j]);
                dz_i[j] += static_cast<float>(w * diff);
                dmu_c[j] -= static_cast<float>(w * diff);
            }
        }
    }
    batch.kl *= inv_n;
    return batch;
}

std::vector<int> hard_assignment(const Tensor& q) {
    std::vector<int> hard(static_cast<std::size_t>(q.rows()));
    for (int i = 0; i < q.rows(); ++i) {
        const float* row = q.row(i);
        int best = 0;
        for (int c = 1; c < q.cols(); ++c) {
            if (row[c] > row[best]) best = c;
        }
        hard[static_cast<std::size_t>(i)] = best;
    }
    return hard;
}

ClusterModel dec_finetune(Network encoder, Network decoder, Tensor centroids, const ActivationDump& dump,
                          const DECConfig& cfg) {
    cfg.validate();
    const int n = dump.n_samples;
    const int k = cfg.n_clusters;
    const int dim = cfg.embedding_dim;
    require_shape(centroids, {k, dim}, "dec_finetune centroids");

    ClusterModel model;
    model.layer_name = dump.layer_name;
    model.config = cfg;

    OptState enc_opt = OptState::for_network(encoder, cfg.finetune_lr(), cfg.momentum);
    Tensor centroid_velocity(centroids.shape);
    Rng shuffle_rng(derive_seed(cfg.seed, "dec-shuffle"));

    std::vector<int> prev_hard;
    int epoch = 0;
    for (; epoch < cfg.dec_max_epochs; ++epoch) {
        const Tensor z = encode(encoder, dump.data);
        const SoftAssignment q = soft_assign(z, centroids, cfg.alpha);
        const Tensor p = target_distribution(q);
        model.diagnostics.kl_curve.push_back(kl_divergence(p, q.q));

        const std::vector<int> hard = hard_assignment(q.q);
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (const int h : hard) ++counts[static_cast<std::size_t>(h)];
        for (const int c : counts) {
            if (c == 0) {
                ++model.diagnostics.empty_hard_cluster_epochs;
                break;
            }
        }
        if (!prev_hard.empty()) {
            int changed = 0;
            for (std::size_t i = 0; i < hard.size(); ++i) {
                if (hard[i] != prev_hard[i]) ++changed;
            }
            const double frac = static_cast<double>(changed) / static_cast<double>(n);
            model.diagnostics.assignment_change_curve.push_back(frac);
            if (frac < cfg.assignment_change_tol) break;
        }
        prev_hard = hard;

        const std::vector<int> order = batch_order(n, shuffle_rng);
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int end = std::min(n, start + cfg.batch_size);
            const std::vector<int> idx(order.begin() + start, order.begin() + end);
            const Tensor batch = gather_rows(dump.data, idx);

            ForwardCache cache;
            const Tensor zb = forward(encoder, batch, &cache);
            const KLBatch grads = kl_batch(zb, centroids, gather_rows(p, idx), cfg.alpha);
            if (!std::isfinite(grads.kl)) {
                throw NumericError("dec_finetune diverged at epoch " + std::to_string(epoch));
            }
            sgd_step(encoder, backprop(encoder, cache, grads.d_embeddings), enc_opt);
            for (std::size_t i = 0; i < centroids.data.size(); ++i) {
                centroid_velocity.data[i] =
                    cfg.momentum * centroid_velocity.data[i] - cfg.finetune_lr() * grads.d_centroids.data[i];
                centroids.data[i] += centroid_velocity.data[i];
            }
        }
        model.diagnostics.epochs_run = epoch + 1;
    }

    // Final state diagnostics.
    {
        const Tensor z = encode(encoder, dump.data);
        const SoftAssignment q = soft_assign(z, centroids, cfg.alpha);
        const Tensor p = target_distribution(q);
        model.diagnostics.kl_curve.push_back(kl_divergence(p, q.q));
        for (int c = 0; c < k; ++c) {
            double norm_sq = 0.0;
            for (int j = 0; j < dim; ++j) {
                norm_sq += static_cast<double>(centroids.at(c, j)) * static_cast<double>(centroids.at(c, j));
            }
            model.diagnostics.final_centroid_norms.push_back(std::sqrt(norm_sq));
        }
    }

    model.encoder = std::move(encoder);
    model.decoder = std::move(decoder);
    model.centroids = std::move(centroids);
    return model;
}

ClusterModel train_cluster_model(const ActivationDump& dump, const DECConfig& cfg) {
    AutoencoderResult ae = pretrain_autoencoder(dump, cfg);
    const Tensor embeddings = encode(ae.encoder, dump.data);
    const KMeansResult km =
        kmeans(embeddings, cfg.n_clusters, cfg.kmeans_restarts, derive_seed(cfg.seed, "kmeans"));
    ClusterModel model = dec_finetune(std::move(ae.encoder), std::move(ae.decoder), km.centroids, dump, cfg);
    model.diagnostics.initial_recon_loss = ae.initial_loss;
    model.diagnostics.final_recon_loss = ae.final_loss;
    return model;
}

std::uint64_t cluster_model_checksum(const ClusterModel& model) {
    std::uint64_t h = param_checksum(model.encoder);
    h ^= param_checksum(model.decoder) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    for (const float v : model.centroids.data) {
        std::uint32_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        h ^= bits + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
}

}  // namespace actclust
