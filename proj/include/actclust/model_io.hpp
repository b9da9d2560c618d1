#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "actclust/baseline.hpp"
#include "actclust/dec.hpp"
#include "actclust/nn.hpp"
#include "actclust/tensor.hpp"

namespace actclust {

// Model files share one container: magic "ACMD", version u32 = 1 (little
// endian), json_len u32, JSON header bytes, then one ACTV-encoded block per
// entry of header["blocks"], in order.
struct NamedTensor {
    std::string name;
    Tensor tensor;
};

struct ModelContainer {
    nlohmann::json header;
    std::vector<NamedTensor> blocks;

    const Tensor& block(const std::string& name) const;
};

void write_model_container(const std::string& path, nlohmann::json header, std::vector<NamedTensor> blocks);
ModelContainer read_model_container(const std::string& path);

nlohmann::json network_to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);

nlohmann::json dec_config_to_json(const DECConfig& cfg);
DECConfig dec_config_from_json(const nlohmann::json& j);

// Baseline model file: header {type, network, train_accuracy, test_accuracy,
// loss_curve, checksum} + parameter blocks.
void save_baseline(const TrainedBaseline& model, const std::string& path);
TrainedBaseline load_baseline(const std::string& path);

// Cluster model file: header {type, layer_name, config, diagnostics, encoder,
// decoder} + encoder/decoder parameter blocks + centroids.
void save_cluster_model(const ClusterModel& model, const std::string& path);
ClusterModel load_cluster_model(const std::string& path);

}  // namespace actclust
