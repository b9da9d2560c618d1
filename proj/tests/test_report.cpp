#include <doctest.h>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "actclust/errors.hpp"
#include "actclust/report.hpp"
#include "actclust/store.hpp"
#include "actclust/synthdigits.hpp"
#include "test_support.hpp"

using namespace actclust;
using testsupport::TempDir;

namespace {

// Independent minimal P5 reader.
struct PgmImage {
    int width = 0;
    int height = 0;
    int maxval = 0;
    std::vector<unsigned char> pixels;
};

PgmImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::string magic;
    in >> magic;
    REQUIRE(magic == "P5");
    PgmImage img;
    in >> img.width >> img.height >> img.maxval;
    in.get();  // single whitespace after maxval
    img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    REQUIRE(in.good());
    return img;
}

// Well-formedness: every opened tag is closed in order; void elements and
// self-closing tags are skipped.
bool html_well_formed(const std::string& html) {
    static const std::regex tag_re("<([!/]?)([a-zA-Z0-9]+)([^>]*)>");
    std::vector<std::string> stack;
    for (auto it = std::sregex_iterator(html.begin(), html.end(), tag_re); it != std::sregex_iterator(); ++it) {
        const std::string prefix = (*it)[1];
        std::string name = (*it)[2];
        const std::string rest = (*it)[3];
        for (char& c : name) c = static_cast<char>(std::tolower(c));
        if (prefix == "!") continue;  // doctype
        const bool is_void = name == "img" || name == "br" || name == "meta" || name == "hr" || name == "link";
        if (prefix == "/") {
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
        } else if (!is_void && (rest.empty() || rest.back() != '/')) {
            stack.push_back(name);
        }
    }
    return stack.empty();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int count_substr(const std::string& haystack, const std::string& needle) {
    int count = 0;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

// A materialized results directory with a square-image dataset.
void prepare_run_dir(const TempDir& dir, int n_train, int n_test) {
    const SynthDigits train = make_synth_digits(n_train, 900);
    const SynthDigits test = make_synth_digits(n_test, 901);
    write_dump(ActivationDump::from_tensor("train.images", train.images), dir.file("train_images.actv"));
    write_idx_labels(dir.file("train_labels.idx"), train.labels);
    write_dump(ActivationDump::from_tensor("test.images", test.images), dir.file("test_images.actv"));
    write_idx_labels(dir.file("test_labels.idx"), test.labels);

    DatasetManifest manifest;
    manifest.splits["train"] = {n_train, "train_images.actv", "train_labels.idx", "actv"};
    manifest.splits["test"] = {n_test, "test_images.actv", "test_labels.idx", "actv"};
    for (int c = 0; c < 10; ++c) manifest.classes.push_back(std::to_string(c));
    manifest.baseline_checksum = "0";
    write_manifest(manifest, dir.file("manifest.json"));
}

}  // namespace

TEST_SUITE_BEGIN("report");

TEST_CASE("write_pgm endpoints and zero image") {
    TempDir dir("pgm");
    std::vector<float> zero(16, 0.0f);
    write_pgm(dir.file("zero.pgm"), zero.data(), 4);
    const PgmImage z = read_pgm(dir.file("zero.pgm"));
    CHECK(z.width == 4);
    CHECK(z.maxval == 255);
    for (const unsigned char p : z.pixels) CHECK(p == 0);

    std::vector<float> one(16, 1.0f);
    write_pgm(dir.file("one.pgm"), one.data(), 4);
    for (const unsigned char p : read_pgm(dir.file("one.pgm")).pixels) CHECK(p == 255);
}

TEST_CASE("thumbnails round-trip through an independent reader") {
    TempDir dir("thumbs");
    const SynthDigits digits = make_synth_digits(3, 77);
    const std::vector<std::string> paths = emit_thumbnails(digits.images, {0, 2}, dir.str());
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].find("train_0.pgm") != std::string::npos);
    CHECK(paths[1].find("train_2.pgm") != std::string::npos);

    const PgmImage img = read_pgm(paths[1]);
    CHECK(img.width == 28);
    CHECK(img.height == 28);
    for (int i = 0; i < 784; ++i) {
        const float v = digits.images.at(2, i) * 255.0f;
        const int expect = static_cast<int>(std::lround(std::min(255.0f, std::max(0.0f, v))));
        CHECK(static_cast<int>(img.pixels[static_cast<std::size_t>(i)]) == expect);
    }
}

TEST_CASE("emit_thumbnails rejects non-square samples") {
    Tensor images({2, 10}, 0.5f);
    TempDir dir("nonsq");
    CHECK_THROWS_AS(emit_thumbnails(images, {0}, dir.str()), FormatError);
}

TEST_CASE("report with no results still renders a metrics table") {
    TempDir dir("report_empty");
    prepare_run_dir(dir, 4, 2);
    emit_html_report(dir.str());
    const std::string html = slurp(dir.file("report.html"));
    CHECK(html_well_formed(html));
    CHECK(html.find("Surrogate metrics") != std::string::npos);
    CHECK(html.find("n/a") != std::string::npos);
}

TEST_CASE("report rows carry k+1 images per query") {
    TempDir dir("report_rows");
    prepare_run_dir(dir, 8, 3);

    const int top_k = 4;
    nlohmann::json ranked = nlohmann::json::array();
    for (int i = 0; i < top_k; ++i) {
        ranked.push_back({{"train_index", i}, {"score", 0.1 * i}, {"per_layer_distances", {0.1 * i}}});
    }
    const nlohmann::json similar = {{"weights", {1.0}},
                                    {"top_k", top_k},
                                    {"queries", {{{"query_id", 1}, {"ranked", ranked}}}}};
    std::ofstream(dir.file("similar_w1.json")) << similar.dump(2);

    const nlohmann::json eval = {{"accuracy", 0.9}, {"fidelity", 0.95}, {"weights", {1.0}}};
    std::ofstream(dir.file("eval.json")) << eval.dump(2);

    emit_html_report(dir.str());
    const std::string html = slurp(dir.file("report.html"));
    CHECK(html_well_formed(html));

    // One query row: query thumbnail plus top_k result thumbnails.
    const std::size_t row_start = html.find("<tr>", html.find("Similar training examples"));
    const std::size_t row_end = html.find("</tr>", row_start);
    REQUIRE(row_start != std::string::npos);
    const std::string row = html.substr(row_start, row_end - row_start);
    CHECK(count_substr(row, "<img ") == top_k + 1);
    CHECK(row.find("border:3px solid red") != std::string::npos);

    // Thumbnails got materialized for the referenced indices.
    CHECK(std::filesystem::exists(dir.path / "thumbs" / "test_1.pgm"));
    CHECK(std::filesystem::exists(dir.path / "thumbs" / "train_0.pgm"));
}

TEST_CASE("report renders concept rows and metrics") {
    TempDir dir("report_concepts");
    prepare_run_dir(dir, 6, 2);

    const nlohmann::json concepts = {
        {"layer_name", "layer2"},
        {"m", 3},
        {"mean_purity", 0.8},
        {"concepts",
         {{{"cluster_index", 0},
           {"members", {0, 1, 2}},
           {"member_distances", {0.1, 0.2, 0.3}},
           {"label_histogram", {3, 0}},
           {"mean_member_distance", 0.2},
           {"purity", 1.0}}}}};
    std::ofstream(dir.file("concepts_layer2.json")) << concepts.dump(2);

    emit_html_report(dir.str());
    const std::string html = slurp(dir.file("report.html"));
    CHECK(html_well_formed(html));
    CHECK(html.find("Concepts") != std::string::npos);
    CHECK(html.find("cluster 0") != std::string::npos);
    CHECK(count_substr(html, "<img ") == 3);
}

TEST_CASE("report requires the manifest") {
    TempDir dir("report_missing");
    CHECK_THROWS_AS(emit_html_report(dir.str()), DataError);
}

TEST_SUITE_END();
