#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "actclust/tensor.hpp"

namespace actclust {

// --- labels ---

struct LabelArray {
    std::vector<int> values;

    int count() const { return static_cast<int>(values.size()); }
    // Every label must lie in [0, n_classes).
    void validate(int n_classes) const;
};

// --- IDX files (MNIST convention, big-endian headers) ---

// Images (magic 0x00000803) come back as a [n, rows*cols] tensor scaled to
// [0,1]; labels (magic 0x00000801) as a LabelArray.
std::variant<Tensor, LabelArray> read_idx(const std::string& path);

Tensor read_idx_images(const std::string& path);
LabelArray read_idx_labels(const std::string& path);

// Writers for fixtures and materialized datasets; values are quantized back
// to unsigned bytes.
void write_idx_images(const std::string& path, const Tensor& images, int img_rows, int img_cols);
void write_idx_labels(const std::string& path, const LabelArray& labels);

// --- activation dumps ---

// Binary layout, little-endian: magic "ACTV", version u32 = 1, name_len u32,
// name bytes (UTF-8), n_samples u32, feature_dim u32, reserved u64 = 0,
// float32 payload row-major.
struct ActivationDump {
    std::string layer_name;
    int n_samples = 0;
    int feature_dim = 0;
    Tensor data;  // [n_samples, feature_dim]

    static ActivationDump from_tensor(std::string layer_name, Tensor t);
};

void write_dump(const ActivationDump& dump, const std::string& path);
ActivationDump read_dump(const std::string& path);

// --- synthetic blobs ---

struct Blobs {
    Tensor points;      // [k * n_per, dim]
    LabelArray labels;  // blob index per sample
    Tensor centers;     // [k, dim]
};

// Unit-variance Gaussian blobs around mutually distant centers (pairwise
// center distance >= separation). Deterministic for a given seed.
Blobs make_blobs(int k, int n_per, int dim, double separation, std::uint64_t seed);

// --- run manifest ---

struct SplitInfo {
    int count = 0;
    std::string images;  // path
    std::string labels;  // path
    std::string format;  // "idx" or "actv"
};

struct DatasetManifest {
    std::map<std::string, SplitInfo> splits;       // "train", "test"
    std::vector<std::string> classes;              // class names, size >= 2
    std::map<std::string, std::string> files;      // named pipeline artifacts
    std::string baseline_checksum;                 // hex, empty until trained

    void validate() const;
};

void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

// --- loaded dataset ---

struct Dataset {
    Tensor train_x;
    LabelArray train_y;
    Tensor test_x;
    LabelArray test_y;
    std::vector<std::string> classes;
    int image_side = 0;  // square image side, 0 when samples are not images

    int n_classes() const { return static_cast<int>(classes.size()); }
};

// Loads the split files a manifest references and cross-checks counts.
Dataset load_dataset(const DatasetManifest& manifest, const std::string& base_dir);

}  // namespace actclust
