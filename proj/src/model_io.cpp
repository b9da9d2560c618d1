#include "actclust/model_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "actclust/errors.hpp"
#include "actclust/store.hpp"

namespace actclust {

namespace {

constexpr char kModelMagic[4] = {'A', 'C', 'M', 'D'};
constexpr std::uint32_t kModelVersion = 1;

void put_le32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t le32_from(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

// Blocks reuse the activation-dump record encoding; rank-1 tensors are stored
// as a single row.
void write_block(std::ostream& out, const NamedTensor& block) {
    const Tensor& t = block.tensor;
    int rows;
    int cols;
    if (t.rank() == 2) {
        rows = t.rows();
        cols = t.cols();
    } else if (t.rank() == 1) {
        rows = 1;
        cols = t.shape[0];
    } else {
        throw FormatError("model block '" + block.name + "' must be rank 1 or 2");
    }
    out.write("ACTV", 4);
    put_le32(out, 1);
    put_le32(out, static_cast<std::uint32_t>(block.name.size()));
    out.write(block.name.data(), static_cast<std::streamsize>(block.name.size()));
    put_le32(out, static_cast<std::uint32_t>(rows));
    put_le32(out, static_cast<std::uint32_t>(cols));
    put_le32(out, 0);
    put_le32(out, 0);
    for (const float v : t.data) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        put_le32(out, bits);
    }
}

NamedTensor read_block(std::istream& in, const std::string& path) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "ACTV", 4) != 0) {
        throw FormatError("model block missing ACTV magic in " + path);
    }
    const std::uint32_t version = le32_from(in);
    if (version != 1) throw FormatError("unsupported block version in " + path);
    const std::uint32_t name_len = le32_from(in);
    NamedTensor block;
    block.name.resize(name_len);
    in.read(block.name.data(), name_len);
    const std::uint32_t rows = le32_from(in);
    const std::uint32_t cols = le32_from(in);
    le32_from(in);
    le32_from(in);
    if (!in) throw FormatError("model block header truncated in " + path);
    block.tensor = Tensor({static_cast<int>(rows), static_cast<int>(cols)});
    for (float& v : block.tensor.data) {
        const std::uint32_t bits = le32_from(in);
        std::memcpy(&v, &bits, 4);
    }
    if (!in) throw FormatError("model block payload truncated in " + path);
    return block;
}

std::vector<NamedTensor> network_param_blocks(const Network& net, const std::string& prefix) {
    std::vector<NamedTensor> blocks;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        if (!net.layers[li].has_params()) continue;
        blocks.push_back({prefix + ".L" + std::to_string(li) + ".weight", net.layers[li].weight});
        blocks.push_back({prefix + ".L" + std::to_string(li) + ".bias", net.layers[li].bias});
    }
    return blocks;
}

void load_network_params(Network& net, const ModelContainer& container, const std::string& prefix) {
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        if (!net.layers[li].has_params()) continue;
        const std::string base = prefix + ".L" + std::to_string(li);
        const Tensor& w = container.block(base + ".weight");
        require_shape(w, net.layers[li].weight.shape, "loaded weight");
        net.layers[li].weight = w;
        const Tensor& b = container.block(base + ".bias");
        if (b.size() != net.layers[li].bias.size()) {
            throw FormatError("loaded bias size mismatch at " + base);
        }
        net.layers[li].bias.data = b.data;
    }
}

}  // namespace

const Tensor& ModelContainer::block(const std::string& name) const {
    for (const NamedTensor& b : blocks) {
        if (b.name == name) return b.tensor;
    }
    throw FormatError("model container has no block '" + name + "'");
}

void write_model_container(const std::string& path, nlohmann::json header, std::vector<NamedTensor> blocks) {
    std::vector<std::string> names;
    names.reserve(blocks.size());
    for (const NamedTensor& b : blocks) names.push_back(b.name);
    header["blocks"] = names;
    const std::string json_bytes = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    out.write(kModelMagic, 4);
    put_le32(out, kModelVersion);
    put_le32(out, static_cast<std::uint32_t>(json_bytes.size()));
    out.write(json_bytes.data(), static_cast<std::streamsize>(json_bytes.size()));
    for (const NamedTensor& b : blocks) write_block(out, b);
    if (!out) throw FormatError("failed writing: " + path);
}

ModelContainer read_model_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kModelMagic, 4) != 0) {
        throw FormatError("bad model magic (expected \"ACMD\") in " + path);
    }
    const std::uint32_t version = le32_from(in);
    if (version != kModelVersion) {
        throw FormatError("unsupported model version " + std::to_string(version) + " in " + path);
    }
    const std::uint32_t json_len = le32_from(in);
    std::string json_bytes(json_len, '\0');
    in.read(json_bytes.data(), json_len);
    if (!in) throw FormatError("model header truncated in " + path);

    ModelContainer container;
    try {
        container.header = nlohmann::json::parse(json_bytes);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("model header is not valid JSON: " + std::string(e.what()));
    }
    const auto names = container.header.value("blocks", std::vector<std::string>{});
    for (std::size_t i = 0; i < names.size(); ++i) {
        NamedTensor block = read_block(in, path);
        if (block.name != names[i]) {
            throw FormatError("model block order mismatch: expected '" + names[i] + "', found '" + block.name +
                              "'");
        }
        container.blocks.push_back(std::move(block));
    }
    return container;
}

nlohmann::json network_to_json(const Network& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (const LayerSpec& l : net.layers) {
        switch (l.kind) {
            case LayerKind::Affine:
                layers.push_back({{"kind", "affine"}, {"in", l.in_dim}, {"out", l.out_dim}});
                break;
            case LayerKind::Relu:
                layers.push_back({{"kind", "relu"}, {"dim", l.in_dim}});
                break;
            case LayerKind::SphereProject:
                layers.push_back({{"kind", "sphere"}, {"dim", l.in_dim}, {"radius", l.radius}});
                break;
        }
    }
    return {{"layers", layers}, {"seed", net.rng_seed}};
}

Network network_from_json(const nlohmann::json& j) {
    Network net;
    net.rng_seed = j.value("seed", 0ull);
    for (const auto& lj : j.at("layers")) {
        const std::string kind = lj.at("kind").get<std::string>();
        if (kind == "affine") {
            net.layers.push_back(LayerSpec::affine(lj.at("in").get<int>(), lj.at("out").get<int>()));
        } else if (kind == "relu") {
            net.layers.push_back(LayerSpec::relu(lj.at("dim").get<int>()));
        } else if (kind == "sphere") {
            net.layers.push_back(LayerSpec::sphere(lj.at("dim").get<int>(), lj.at("radius").get<float>()));
        } else {
            throw FormatError("unknown layer kind '" + kind + "' in network JSON");
        }
    }
    return net;
}

nlohmann::json dec_config_to_json(const DECConfig& cfg) {
    return {{"embedding_dim", cfg.embedding_dim},
            {"n_clusters", cfg.n_clusters},
            {"alpha", cfg.alpha},
            {"radius", cfg.radius},
            {"hidden_dim", cfg.hidden_dim},
            {"ae_epochs", cfg.ae_epochs},
            {"dec_max_epochs", cfg.dec_max_epochs},
            {"assignment_change_tol", cfg.assignment_change_tol},
            {"kmeans_restarts", cfg.kmeans_restarts},
            {"learning_rate", cfg.learning_rate},
            {"dec_learning_rate", cfg.dec_learning_rate},
            {"momentum", cfg.momentum},
            {"batch_size", cfg.batch_size},
            {"seed", cfg.seed}};
}

DECConfig dec_config_from_json(const nlohmann::json& j) {
    DECConfig cfg;
    cfg.embedding_dim = j.value("embedding_dim", cfg.embedding_dim);
    cfg.n_clusters = j.value("n_clusters", cfg.n_clusters);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.radius = j.value("radius", cfg.radius);
    cfg.hidden_dim = j.value("hidden_dim", cfg.hidden_dim);
    cfg.ae_epochs = j.value("ae_epochs", cfg.ae_epochs);
    cfg.dec_max_epochs = j.value("dec_max_epochs", cfg.dec_max_epochs);
    cfg.assignment_change_tol = j.value("assignment_change_tol", cfg.assignment_change_tol);
    cfg.kmeans_restarts = j.value("kmeans_restarts", cfg.kmeans_restarts);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.dec_learning_rate = j.value("dec_learning_rate", cfg.dec_learning_rate);
    cfg.momentum = j.value("momentum", cfg.momentum);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

void save_baseline(const TrainedBaseline& model, const std::string& path) {
    nlohmann::json header = {{"type", "baseline"},
                             {"network", network_to_json(model.network)},
                             {"train_accuracy", model.train_accuracy},
                             {"test_accuracy", model.test_accuracy},
                             {"loss_curve", model.loss_curve},
                             {"checksum", model.checksum}};
    write_model_container(path, std::move(header), network_param_blocks(model.network, "net"));
}

TrainedBaseline load_baseline(const std::string& path) {
    const ModelContainer container = read_model_container(path);
    if (container.header.value("type", "") != "baseline") {
        throw FormatError("not a baseline model file: " + path);
    }
    TrainedBaseline model;
    model.network = network_from_json(container.header.at("network"));
    load_network_params(model.network, container, "net");
    model.train_accuracy = container.header.value("train_accuracy", 0.0);
    model.test_accuracy = container.header.value("test_accuracy", 0.0);
    model.loss_curve = container.header.value("loss_curve", std::vector<double>{});
    model.checksum = container.header.value("checksum", 0ull);
    if (param_checksum(model.network) != model.checksum) {
        throw FormatError("baseline parameter checksum mismatch in " + path);
    }
    return model;
}

namespace {

nlohmann::json diagnostics_to_json(const DECDiagnostics& d) {
    return {{"initial_recon_loss", d.initial_recon_loss},
            {"final_recon_loss", d.final_recon_loss},
            {"kl_curve", d.kl_curve},
            {"assignment_change_curve", d.assignment_change_curve},
            {"final_centroid_norms", d.final_centroid_norms},
            {"epochs_run", d.epochs_run},
            {"empty_hard_cluster_epochs", d.empty_hard_cluster_epochs}};
}

DECDiagnostics diagnostics_from_json(const nlohmann::json& j) {
    DECDiagnostics d;
    d.initial_recon_loss = j.value("initial_recon_loss", 0.0);
    d.final_recon_loss = j.value("final_recon_loss", 0.0);
    d.kl_curve = j.value("kl_curve", std::vector<double>{});
    d.assignment_change_curve = j.value("assignment_change_curve", std::vector<double>{});
    d.final_centroid_norms = j.value("final_centroid_norms", std::vector<double>{});
    d.epochs_run = j.value("epochs_run", 0);
    d.empty_hard_cluster_epochs = j.value("empty_hard_cluster_epochs", 0);
    return d;
}

}  // namespace

void save_cluster_model(const ClusterModel& model, const std::string& path) {
    nlohmann::json header = {{"type", "cluster_model"},
                             {"layer_name", model.layer_name},
                             {"config", dec_config_to_json(model.config)},
                             {"diagnostics", diagnostics_to_json(model.diagnostics)},
                             {"encoder", network_to_json(model.encoder)},
                             {"decoder", network_to_json(model.decoder)}};
    std::vector<NamedTensor> blocks = network_param_blocks(model.encoder, "encoder");
    for (NamedTensor& b : network_param_blocks(model.decoder, "decoder")) blocks.push_back(std::move(b));
    blocks.push_back({"centroids", model.centroids});
    write_model_container(path, std::move(header), std::move(blocks));
}

ClusterModel load_cluster_model(const std::string& path) {
    const ModelContainer container = read_model_container(path);
    if (container.header.value("type", "") != "cluster_model") {
        throw FormatError("not a cluster model file: " + path);
    }
    ClusterModel model;
    model.layer_name = container.header.value("layer_name", "");
    model.config = dec_config_from_json(container.header.at("config"));
    model.diagnostics = diagnostics_from_json(container.header.at("diagnostics"));
    model.encoder = network_from_json(container.header.at("encoder"));
    model.decoder = network_from_json(container.header.at("decoder"));
    load_network_params(model.encoder, container, "encoder");
    load_network_params(model.decoder, container, "decoder");
    model.centroids = container.block("centroids");
    require_shape(model.centroids, {model.config.n_clusters, model.config.embedding_dim}, "loaded centroids");
    return model;
}

}  // namespace actclust
