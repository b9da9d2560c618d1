#include <doctest.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "actclust/errors.hpp"
#include "actclust/rng.hpp"
#include "actclust/store.hpp"
#include "test_support.hpp"

using namespace actclust;
using testsupport::TempDir;

namespace {

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void push_be32(std::vector<unsigned char>& v, std::uint32_t x) {
    v.push_back(static_cast<unsigned char>(x >> 24));
    v.push_back(static_cast<unsigned char>(x >> 16));
    v.push_back(static_cast<unsigned char>(x >> 8));
    v.push_back(static_cast<unsigned char>(x));
}

std::vector<unsigned char> tiny_image_idx() {
    std::vector<unsigned char> bytes;
    push_be32(bytes, 0x00000803u);
    push_be32(bytes, 2);  // images
    push_be32(bytes, 2);  // rows
    push_be32(bytes, 2);  // cols
    for (int i = 0; i < 8; ++i) bytes.push_back(i % 2 == 0 ? 0 : 255);
    return bytes;
}

}  // namespace

TEST_SUITE_BEGIN("store");

TEST_CASE("read_idx scales image bytes into [0,1]") {
    TempDir dir("idx_images");
    write_bytes(dir.file("img.idx"), tiny_image_idx());
    const Tensor t = read_idx_images(dir.file("img.idx"));
    CHECK(t.shape == std::vector<int>{2, 4});
    CHECK(t.data == std::vector<float>{0.0f, 1.0f, 0.0f, 1.0f, 0.0f, 1.0f, 0.0f, 1.0f});
}

TEST_CASE("read_idx reads label files") {
    TempDir dir("idx_labels");
    std::vector<unsigned char> bytes;
    push_be32(bytes, 0x00000801u);
    push_be32(bytes, 3);
    bytes.push_back(3);
    bytes.push_back(1);
    bytes.push_back(4);
    write_bytes(dir.file("labels.idx"), bytes);
    const LabelArray labels = read_idx_labels(dir.file("labels.idx"));
    CHECK(labels.values == std::vector<int>{3, 1, 4});
}

TEST_CASE("read_idx reports the observed bad magic") {
    TempDir dir("idx_magic");
    std::vector<unsigned char> bytes;
    push_be32(bytes, 0x12345678u);
    push_be32(bytes, 0);
    write_bytes(dir.file("bad.idx"), bytes);
    CHECK_THROWS_WITH_AS(read_idx(dir.file("bad.idx")), doctest::Contains("0x12345678"), FormatError);
}

TEST_CASE("read_idx rejects truncated payloads") {
    TempDir dir("idx_trunc");
    std::vector<unsigned char> bytes = tiny_image_idx();
    bytes.pop_back();
    write_bytes(dir.file("trunc.idx"), bytes);
    CHECK_THROWS_WITH_AS(read_idx(dir.file("trunc.idx")), doctest::Contains("length"), FormatError);
}

TEST_CASE("idx image round-trip through the writer") {
    TempDir dir("idx_rt");
    Rng rng(3);
    Tensor images({4, 9});
    for (float& v : images.data) v = static_cast<float>(rng.uniform());
    write_idx_images(dir.file("img.idx"), images, 3, 3);
    const Tensor back = read_idx_images(dir.file("img.idx"));
    CHECK(back.shape == images.shape);
    // Quantized to bytes: exact within half a step.
    for (std::size_t i = 0; i < images.data.size(); ++i) {
        CHECK(std::fabs(back.data[i] - images.data[i]) <= 0.5f / 255.0f + 1e-6f);
        CHECK(back.data[i] >= 0.0f);
        CHECK(back.data[i] <= 1.0f);
    }
}

TEST_CASE("label array round-trip is exact") {
    TempDir dir("labels_rt");
    const LabelArray labels{{0, 1, 2, 9, 4, 4, 7}};
    write_idx_labels(dir.file("l.idx"), labels);
    CHECK(read_idx_labels(dir.file("l.idx")).values == labels.values);
}

TEST_CASE("official MNIST decodes when a copy is available") {
    const char* dir = std::getenv("MNIST_DIR");
    if (!dir || !std::filesystem::exists(std::string(dir) + "/train-images-idx3-ubyte")) {
        MESSAGE("MNIST_DIR not set; skipping official-file check");
        return;
    }
    const std::string path = std::string(dir) + "/train-images-idx3-ubyte";
    const Tensor t = read_idx_images(path);
    CHECK(t.shape == std::vector<int>{60000, 784});

    // First image against an independent raw-byte decode.
    std::ifstream raw(path, std::ios::binary);
    raw.seekg(16);
    for (int i = 0; i < 784; ++i) {
        unsigned char byte = 0;
        raw.read(reinterpret_cast<char*>(&byte), 1);
        REQUIRE(t.data[static_cast<std::size_t>(i)] ==
                doctest::Approx(static_cast<float>(byte) / 255.0f).epsilon(1e-7));
    }
    for (const float v : t.data) {
        REQUIRE(v >= 0.0f);
        REQUIRE(v <= 1.0f);
    }
}

TEST_CASE("make_blobs separates clusters") {
    const Blobs blobs = make_blobs(2, 50, 5, 100.0, 11);
    REQUIRE(blobs.points.rows() == 100);
    // Nearest-centroid classification is perfect at this separation.
    for (int i = 0; i < blobs.points.rows(); ++i) {
        double best = 1e300;
        int best_k = -1;
        for (int c = 0; c < 2; ++c) {
            double d2 = 0.0;
            for (int j = 0; j < 5; ++j) {
                const double d = static_cast<double>(blobs.points.at(i, j)) - blobs.centers.at(c, j);
                d2 += d * d;
            }
            if (d2 < best) {
                best = d2;
                best_k = c;
            }
        }
        REQUIRE(best_k == blobs.labels.values[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("make_blobs is deterministic and keeps centers separated") {
    const Blobs a = make_blobs(5, 10, 3, 7.5, 21);
    const Blobs b = make_blobs(5, 10, 3, 7.5, 21);
    CHECK(a.points.data == b.points.data);
    CHECK(a.labels.values == b.labels.values);

    for (int i = 0; i < 5; ++i) {
        for (int j = i + 1; j < 5; ++j) {
            double d2 = 0.0;
            for (int d = 0; d < 3; ++d) {
                const double diff = static_cast<double>(a.centers.at(i, d)) - a.centers.at(j, d);
                d2 += diff * diff;
            }
            CHECK(std::sqrt(d2) >= 7.5 - 1e-9);
        }
    }
}

TEST_CASE("make_blobs sample means stay near the centers") {
    const int n_per = 400;
    const Blobs blobs = make_blobs(3, n_per, 4, 25.0, 33);
    const double bound = 5.0 / std::sqrt(static_cast<double>(n_per));  // 5 sigma / sqrt(n), unit variance
    for (int c = 0; c < 3; ++c) {
        for (int j = 0; j < 4; ++j) {
            double mean = 0.0;
            for (int s = 0; s < n_per; ++s) mean += blobs.points.at(c * n_per + s, j);
            mean /= n_per;
            CHECK(std::fabs(mean - static_cast<double>(blobs.centers.at(c, j))) < bound);
        }
    }
}

TEST_CASE("make_blobs validates its arguments") {
    CHECK_THROWS_AS(make_blobs(1, 10, 3, 5.0, 0), ConfigError);
    CHECK_THROWS_AS(make_blobs(3, 10, 3, 0.0, 0), ConfigError);
}

TEST_CASE("activation dump round-trip is bitwise identity") {
    TempDir dir("dump_rt");
    Rng rng(9);
    ActivationDump dump;
    dump.layer_name = "layer2";
    dump.n_samples = 7;
    dump.feature_dim = 5;
    dump.data = Tensor({7, 5});
    for (float& v : dump.data.data) v = static_cast<float>(rng.normal());

    write_dump(dump, dir.file("d.actv"));
    const ActivationDump back = read_dump(dir.file("d.actv"));
    CHECK(back.layer_name == dump.layer_name);
    CHECK(back.n_samples == dump.n_samples);
    CHECK(back.feature_dim == dump.feature_dim);
    CHECK(back.data.data == dump.data.data);
}

TEST_CASE("activation dump file size is 28 + name_len + 4nd") {
    // Header fields: magic 4 + version 4 + name_len 4 + name + n 4 + d 4 +
    // reserved 8 = 28 + name_len bytes before the payload.
    TempDir dir("dump_size");
    ActivationDump dump;
    dump.layer_name = "abcde";
    dump.n_samples = 3;
    dump.feature_dim = 2;
    dump.data = Tensor({3, 2}, 1.5f);
    write_dump(dump, dir.file("d.actv"));
    const auto size = std::filesystem::file_size(dir.file("d.actv"));
    CHECK(size == 28 + 5 + 4 * 3 * 2);
}

TEST_CASE("activation dump distinguishes magic, version and length errors") {
    TempDir dir("dump_err");
    ActivationDump dump;
    dump.layer_name = "x";
    dump.n_samples = 2;
    dump.feature_dim = 2;
    dump.data = Tensor({2, 2}, 0.5f);
    write_dump(dump, dir.file("d.actv"));

    auto patch = [&](std::size_t offset, unsigned char value, const std::string& name) {
        std::ifstream in(dir.file("d.actv"), std::ios::binary);
        std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        bytes[offset] = value;
        write_bytes(dir.file(name), bytes);
    };

    patch(0, 'X', "magic.actv");
    CHECK_THROWS_WITH_AS(read_dump(dir.file("magic.actv")), doctest::Contains("magic"), FormatError);

    patch(4, 9, "version.actv");
    CHECK_THROWS_WITH_AS(read_dump(dir.file("version.actv")), doctest::Contains("version"), FormatError);

    {
        std::ifstream in(dir.file("d.actv"), std::ios::binary);
        std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        bytes.pop_back();
        write_bytes(dir.file("short.actv"), bytes);
    }
    CHECK_THROWS_WITH_AS(read_dump(dir.file("short.actv")), doctest::Contains("length"), FormatError);
}

TEST_CASE("write_dump rejects non-finite data") {
    TempDir dir("dump_nan");
    ActivationDump dump;
    dump.layer_name = "x";
    dump.n_samples = 1;
    dump.feature_dim = 1;
    dump.data = Tensor({1, 1});
    dump.data.data[0] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(write_dump(dump, dir.file("bad.actv")), NumericError);
}

TEST_CASE("read_dump rejects non-finite payload bytes") {
    TempDir dir("dump_nan_read");
    ActivationDump dump;
    dump.layer_name = "x";
    dump.n_samples = 1;
    dump.feature_dim = 2;
    dump.data = Tensor({1, 2}, 0.5f);
    write_dump(dump, dir.file("d.actv"));

    // Patch the first payload float to a NaN bit pattern.
    std::fstream f(dir.file("d.actv"), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(28 + 1);
    const unsigned char nan_bytes[4] = {0x00, 0x00, 0xc0, 0x7f};
    f.write(reinterpret_cast<const char*>(nan_bytes), 4);
    f.close();
    CHECK_THROWS_WITH_AS(read_dump(dir.file("d.actv")), doctest::Contains("non-finite"), FormatError);
}

TEST_CASE("manifest round-trip preserves every field") {
    TempDir dir("manifest_rt");
    DatasetManifest m;
    m.splits["train"] = {100, "train_images.actv", "train_labels.idx", "actv"};
    m.splits["test"] = {20, "test_images.actv", "test_labels.idx", "actv"};
    m.classes = {"cat", "dog", "frog"};
    m.files["baseline_model"] = "baseline.model";
    m.baseline_checksum = "deadbeef";
    write_manifest(m, dir.file("manifest.json"));

    const DatasetManifest back = read_manifest(dir.file("manifest.json"));
    CHECK(back.classes == m.classes);
    CHECK(back.baseline_checksum == m.baseline_checksum);
    CHECK(back.files == m.files);
    CHECK(back.splits.at("train").count == 100);
    CHECK(back.splits.at("test").images == "test_images.actv");

    // Re-serialization is byte-identical.
    write_manifest(back, dir.file("manifest2.json"));
    std::ifstream a(dir.file("manifest.json"), std::ios::binary);
    std::ifstream b(dir.file("manifest2.json"), std::ios::binary);
    const std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    const std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
}

TEST_CASE("manifest validation catches missing pieces") {
    DatasetManifest m;
    m.splits["train"] = {10, "a", "b", "actv"};
    m.classes = {"only-one"};
    CHECK_THROWS_AS(m.validate(), DataError);

    m.classes = {"a", "b"};
    m.splits["train"].format = "csv";
    CHECK_THROWS_AS(m.validate(), DataError);
}

TEST_SUITE_END();
