#include "actclust/store.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "actclust/errors.hpp"
#include "actclust/rng.hpp"

namespace actclust {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803u;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801u;
constexpr char kDumpMagic[4] = {'A', 'C', 'T', 'V'};
constexpr std::uint32_t kDumpVersion = 1;

std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open file: " + path);
    in.seekg(0, std::ios::end);
    const std::streamoff len = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(len));
    if (len > 0) in.read(reinterpret_cast<char*>(bytes.data()), len);
    if (!in) throw FormatError("failed reading file: " + path);
    return bytes;
}

std::uint32_t be32(const unsigned char* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void put_be32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t le64(const unsigned char* p) {
    return static_cast<std::uint64_t>(le32(p)) | (static_cast<std::uint64_t>(le32(p + 4)) << 32);
}

void put_le32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_le64(std::ostream& out, std::uint64_t v) {
    put_le32(out, static_cast<std::uint32_t>(v));
    put_le32(out, static_cast<std::uint32_t>(v >> 32));
}

std::string hex_magic(std::uint32_t magic) {
    std::ostringstream os;
    os << "0x" << std::hex << magic;
    return os.str();
}

}  // namespace

void LabelArray::validate(int n_classes) const {
    for (const int v : values) {
        if (v < 0 || v >= n_classes) {
            throw IndexError("label " + std::to_string(v) + " out of range [0, " + std::to_string(n_classes) +
                             ")");
        }
    }
}

std::variant<Tensor, LabelArray> read_idx(const std::string& path) {
    const std::vector<unsigned char> bytes = read_file_bytes(path);
    if (bytes.size() < 8) throw FormatError("IDX file too short for header: " + path);
    const std::uint32_t magic = be32(bytes.data());

    if (magic == kIdxImagesMagic) {
        if (bytes.size() < 16) throw FormatError("IDX image file truncated header: " + path);
        const std::uint32_t n = be32(bytes.data() + 4);
        const std::uint32_t rows = be32(bytes.data() + 8);
        const std::uint32_t cols = be32(bytes.data() + 12);
        const std::size_t expected = 16 + static_cast<std::size_t>(n) * rows * cols;
        if (bytes.size() != expected) {
            throw FormatError("IDX image payload length mismatch: expected " + std::to_string(expected) +
                              " bytes, got " + std::to_string(bytes.size()));
        }
        Tensor t({static_cast<int>(n), static_cast<int>(rows * cols)});
        constexpr float inv255 = 1.0f / 255.0f;
        for (std::size_t i = 0; i < t.data.size(); ++i) {
            t.data[i] = static_cast<float>(bytes[16 + i]) * inv255;
        }
        return t;
    }
    if (magic == kIdxLabelsMagic) {
        const std::uint32_t n = be32(bytes.data() + 4);
        const std::size_t expected = 8 + static_cast<std::size_t>(n);
        if (bytes.size() != expected) {
            throw FormatError("IDX label payload length mismatch: expected " + std::to_string(expected) +
                              " bytes, got " + std::to_string(bytes.size()));
        }
        LabelArray labels;
        labels.values.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) labels.values.push_back(static_cast<int>(bytes[8 + i]));
        return labels;
    }
    throw FormatError("bad IDX magic " + hex_magic(magic) + " in " + path);
}

Tensor read_idx_images(const std::string& path) {
    auto v = read_idx(path);
    if (!std::holds_alternative<Tensor>(v)) throw FormatError("expected IDX image file: " + path);
    return std::get<Tensor>(std::move(v));
}

LabelArray read_idx_labels(const std::string& path) {
    auto v = read_idx(path);
    if (!std::holds_alternative<LabelArray>(v)) throw FormatError("expected IDX label file: " + path);
    return std::get<LabelArray>(std::move(v));
}

void write_idx_images(const std::string& path, const Tensor& images, int img_rows, int img_cols) {
    if (images.cols() != img_rows * img_cols) {
        throw ShapeError("write_idx_images: " + std::to_string(images.cols()) + " pixels per sample vs " +
                         std::to_string(img_rows) + "x" + std::to_string(img_cols));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    put_be32(out, kIdxImagesMagic);
    put_be32(out, static_cast<std::uint32_t>(images.rows()));
    put_be32(out, static_cast<std::uint32_t>(img_rows));
    put_be32(out, static_cast<std::uint32_t>(img_cols));
    std::vector<unsigned char> buf(images.data.size());
    for (std::size_t i = 0; i < images.data.size(); ++i) {
        const float v = images.data[i] * 255.0f;
        buf[i] = static_cast<unsigned char>(std::lround(std::min(255.0f, std::max(0.0f, v))));
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw FormatError("failed writing: " + path);
}

void write_idx_labels(const std::string& path, const LabelArray& labels) {
    labels.validate(256);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    put_be32(out, kIdxLabelsMagic);
    put_be32(out, static_cast<std::uint32_t>(labels.values.size()));
    for (const int v : labels.values) {
        const unsigned char b = static_cast<unsigned char>(v);
        out.write(reinterpret_cast<const char*>(&b), 1);
    }
    if (!out) throw FormatError("failed writing: " + path);
}

ActivationDump ActivationDump::from_tensor(std::string layer_name, Tensor t) {
    ActivationDump dump;
    dump.layer_name = std::move(layer_name);
    dump.n_samples = t.rows();
    dump.feature_dim = t.cols();
    dump.data = std::move(t);
    return dump;
}

void write_dump(const ActivationDump& dump, const std::string& path) {
    if (dump.layer_name.empty()) throw FormatError("activation dump needs a nonempty layer name");
    require_shape(dump.data, {dump.n_samples, dump.feature_dim}, "activation dump data");
    if (!dump.data.all_finite()) throw NumericError("activation dump contains non-finite values");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    out.write(kDumpMagic, 4);
    put_le32(out, kDumpVersion);
    put_le32(out, static_cast<std::uint32_t>(dump.layer_name.size()));
    out.write(dump.layer_name.data(), static_cast<std::streamsize>(dump.layer_name.size()));
    put_le32(out, static_cast<std::uint32_t>(dump.n_samples));
    put_le32(out, static_cast<std::uint32_t>(dump.feature_dim));
    put_le64(out, 0);
    static_assert(sizeof(float) == 4);
    std::vector<unsigned char> payload(dump.data.size() * 4);
    for (std::size_t i = 0; i < dump.data.size(); ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, &dump.data.data[i], 4);
        payload[4 * i] = static_cast<unsigned char>(bits);
        payload[4 * i + 1] = static_cast<unsigned char>(bits >> 8);
        payload[4 * i + 2] = static_cast<unsigned char>(bits >> 16);
        payload[4 * i + 3] = static_cast<unsigned char>(bits >> 24);
    }
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (!out) throw FormatError("failed writing: " + path);
}

ActivationDump read_dump(const std::string& path) {
    const std::vector<unsigned char> bytes = read_file_bytes(path);
    if (bytes.size() < 12) throw FormatError("dump file too short for header: " + path);
    if (std::memcmp(bytes.data(), kDumpMagic, 4) != 0) {
        throw FormatError("bad dump magic (expected \"ACTV\") in " + path);
    }
    const std::uint32_t version = le32(bytes.data() + 4);
    if (version != kDumpVersion) {
        throw FormatError("unsupported dump version " + std::to_string(version) + " in " + path);
    }
    const std::uint32_t name_len = le32(bytes.data() + 8);
    const std::size_t header_len = 12 + static_cast<std::size_t>(name_len) + 16;
    if (bytes.size() < header_len) throw FormatError("dump header truncated: " + path);

    ActivationDump dump;
    dump.layer_name.assign(reinterpret_cast<const char*>(bytes.data() + 12), name_len);
    const unsigned char* p = bytes.data() + 12 + name_len;
    const std::uint32_t n = le32(p);
    const std::uint32_t d = le32(p + 4);
    const std::uint64_t reserved = le64(p + 8);
    if (reserved != 0) throw FormatError("dump reserved field must be zero: " + path);

    const std::size_t expected = header_len + static_cast<std::size_t>(n) * d * 4;
    if (bytes.size() != expected) {
        throw FormatError("dump payload length mismatch: expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(bytes.size()));
    }
    dump.n_samples = static_cast<int>(n);
    dump.feature_dim = static_cast<int>(d);
    dump.data = Tensor({dump.n_samples, dump.feature_dim});
    const unsigned char* payload = bytes.data() + header_len;
    for (std::size_t i = 0; i < dump.data.size(); ++i) {
        const std::uint32_t bits = le32(payload + 4 * i);
        std::memcpy(&dump.data.data[i], &bits, 4);
    }
    if (!dump.data.all_finite()) {
        throw FormatError("dump payload contains non-finite values: " + path);
    }
    return dump;
}

Blobs make_blobs(int k, int n_per, int dim, double separation, std::uint64_t seed) {
    if (k < 2) throw ConfigError("make_blobs: k must be >= 2, got " + std::to_string(k));
    if (!(separation > 0.0)) throw ConfigError("make_blobs: separation must be positive");
    if (n_per < 1 || dim < 1) throw ConfigError("make_blobs: n_per and dim must be positive");

    Blobs blobs;
    blobs.centers = Tensor({k, dim});
    // Center i sits on axis (i % dim) at distance separation * (1 + i / dim),
    // which keeps every pair at least `separation` apart.
    for (int i = 0; i < k; ++i) {
        blobs.centers.at(i, i % dim) = static_cast<float>(separation * (1.0 + static_cast<double>(i / dim)));
    }

    Rng rng(seed);
    blobs.points = Tensor({k * n_per, dim});
    blobs.labels.values.reserve(static_cast<std::size_t>(k) * static_cast<std::size_t>(n_per));
    for (int b = 0; b < k; ++b) {
        for (int s = 0; s < n_per; ++s) {
            float* row = blobs.points.row(b * n_per + s);
            for (int j = 0; j < dim; ++j) {
                row[j] = blobs.centers.at(b, j) + static_cast<float>(rng.normal());
            }
            blobs.labels.values.push_back(b);
        }
    }
    return blobs;
}

void DatasetManifest::validate() const {
    if (classes.size() < 2) throw DataError("manifest needs at least 2 classes");
    for (const auto& [name, split] : splits) {
        if (split.count <= 0) throw DataError("manifest split '" + name + "' has non-positive count");
        if (split.images.empty() || split.labels.empty()) {
            throw DataError("manifest split '" + name + "' is missing file paths");
        }
        if (split.format != "idx" && split.format != "actv") {
            throw DataError("manifest split '" + name + "' has unknown format '" + split.format + "'");
        }
    }
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
    manifest.validate();
    nlohmann::json j;
    for (const auto& [name, split] : manifest.splits) {
        j["splits"][name] = {{"count", split.count},
                             {"images", split.images},
                             {"labels", split.labels},
                             {"format", split.format}};
    }
    j["classes"] = manifest.classes;
    j["files"] = manifest.files;
    j["baseline_checksum"] = manifest.baseline_checksum;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw FormatError("failed writing: " + path);
}

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open manifest: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest is not valid JSON: " + std::string(e.what()));
    }
    DatasetManifest m;
    try {
        for (const auto& [name, js] : j.at("splits").items()) {
            SplitInfo split;
            split.count = js.at("count").get<int>();
            split.images = js.at("images").get<std::string>();
            split.labels = js.at("labels").get<std::string>();
            split.format = js.at("format").get<std::string>();
            m.splits[name] = split;
        }
        m.classes = j.at("classes").get<std::vector<std::string>>();
        m.files = j.at("files").get<std::map<std::string, std::string>>();
        m.baseline_checksum = j.at("baseline_checksum").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest missing required key: " + std::string(e.what()));
    }
    m.validate();
    return m;
}

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
    const std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / p).string();
}

void load_split(const SplitInfo& split, const std::string& base_dir, const std::string& name, Tensor& x,
                LabelArray& y) {
    if (split.format == "idx") {
        x = read_idx_images(resolve(base_dir, split.images));
    } else {
        ActivationDump dump = read_dump(resolve(base_dir, split.images));
        x = std::move(dump.data);
    }
    y = read_idx_labels(resolve(base_dir, split.labels));
    if (x.rows() != split.count || y.count() != split.count) {
        throw DataError("manifest split '" + name + "' count " + std::to_string(split.count) +
                        " does not match files (" + std::to_string(x.rows()) + " samples, " +
                        std::to_string(y.count()) + " labels)");
    }
}

}  // namespace

Dataset load_dataset(const DatasetManifest& manifest, const std::string& base_dir) {
    manifest.validate();
    if (!manifest.splits.count("train") || !manifest.splits.count("test")) {
        throw DataError("manifest must define train and test splits");
    }
    Dataset ds;
    ds.classes = manifest.classes;
    load_split(manifest.splits.at("train"), base_dir, "train", ds.train_x, ds.train_y);
    load_split(manifest.splits.at("test"), base_dir, "test", ds.test_x, ds.test_y);
    ds.train_y.validate(ds.n_classes());
    ds.test_y.validate(ds.n_classes());
    if (ds.train_x.cols() != ds.test_x.cols()) {
        throw DataError("train and test feature dims differ");
    }
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(ds.train_x.cols()))));
    ds.image_side = side * side == ds.train_x.cols() ? side : 0;
    return ds;
}

}  // namespace actclust
