#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "actclust/nn.hpp"
#include "actclust/store.hpp"
#include "actclust/tensor.hpp"

namespace actclust {

struct DECConfig {
    int embedding_dim = 20;
    int n_clusters = 15;
    float alpha = 100.0f;  // Student-t normality parameter; large alpha sharpens assignments
    float radius = 8.0f;   // hypersphere radius shared by all layers
    int hidden_dim = 128;  // autoencoder bottleneck is feature_dim -> hidden_dim -> embedding_dim
    int ae_epochs = 30;
    int dec_max_epochs = 30;
    double assignment_change_tol = 0.001;
    int kmeans_restarts = 10;
    float learning_rate = 0.01f;
    float dec_learning_rate = 0.0f;  // <= 0 means reuse learning_rate
    float momentum = 0.9f;
    int batch_size = 256;
    std::uint64_t seed = 0;

    void validate() const;
    float finetune_lr() const { return dec_learning_rate > 0.0f ? dec_learning_rate : learning_rate; }
};

// Per-sample cluster membership probabilities; rows sum to 1.
struct SoftAssignment {
    Tensor q;  // [n, n_clusters]
};

struct DECDiagnostics {
    double initial_recon_loss = 0.0;
    double final_recon_loss = 0.0;
    std::vector<double> kl_curve;                // KL at each epoch start plus a final entry
    std::vector<double> assignment_change_curve; // fraction changed, from the second epoch on
    std::vector<double> final_centroid_norms;
    int epochs_run = 0;
    int empty_hard_cluster_epochs = 0;  // warning count, empty hard clusters are not fatal
};

struct ClusterModel {
    std::string layer_name;
    Network encoder;  // last layer is sphere_project(radius)
    Network decoder;
    Tensor centroids;  // [n_clusters, embedding_dim], unconstrained in the ambient space
    DECConfig config;
    DECDiagnostics diagnostics;
};

struct AutoencoderResult {
    Network encoder;
    Network decoder;
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

// Jointly trains the reconstruction autoencoder; the encoder ends with the
// hypersphere projection so embeddings land on the radius-R sphere.
AutoencoderResult pretrain_autoencoder(const ActivationDump& dump, const DECConfig& cfg);

// Embeds activations; every output row has norm `radius`.
Tensor encode(const Network& encoder, const Tensor& x);
Tensor encode(const ClusterModel& model, const ActivationDump& dump);

// q_ik proportional to (1 + |z_i - mu_k|^2 / alpha)^(-(alpha+1)/2), rows
// normalized to sum 1.
SoftAssignment soft_assign(const Tensor& embeddings, const Tensor& centroids, float alpha);

// Self-training target: p_ik = (q_ik^2 / f_k) / sum_k'(q_ik'^2 / f_k') with
// f_k the soft cluster frequency. A cluster with zero soft mass is degenerate.
Tensor target_distribution(const SoftAssignment& q);

// Mean per-sample KL(P || Q).
double kl_divergence(const Tensor& p, const Tensor& q);

// One self-training step's ingredients on a block of embeddings: the mean
// KL(P || Q) against the given target rows plus its gradients with respect
// to the embeddings and the centroids.
struct KLBatch {
    Tensor d_embeddings;  // same shape as the embedding block
    Tensor d_centroids;   // same shape as the centroids
    double kl = 0.0;
};
KLBatch kl_batch(const Tensor& embeddings, const Tensor& centroids, const Tensor& target_rows, float alpha);

// Joint gradient descent on encoder parameters and centroids minimizing
// KL(P || Q); P is recomputed from the full dataset once per epoch. Stops
// when the fraction of changed hard assignments drops below
// assignment_change_tol, or at dec_max_epochs.
ClusterModel dec_finetune(Network encoder, Network decoder, Tensor centroids, const ActivationDump& dump,
                          const DECConfig& cfg);

// pretrain_autoencoder + k-means centroid init + dec_finetune.
ClusterModel train_cluster_model(const ActivationDump& dump, const DECConfig& cfg);

// Hard assignment per row, argmax ties broken by lowest cluster index.
std::vector<int> hard_assignment(const Tensor& q);

std::uint64_t cluster_model_checksum(const ClusterModel& model);

}  // namespace actclust
