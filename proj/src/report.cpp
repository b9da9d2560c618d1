#include "actclust/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "actclust/errors.hpp"
#include "actclust/store.hpp"

namespace fs = std::filesystem;

namespace actclust {

void write_pgm(const std::string& path, const float* pixels, int side) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    out << "P5\n" << side << " " << side << "\n255\n";
    std::vector<unsigned char> buf(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
    for (std::size_t i = 0; i < buf.size(); ++i) {
        const float v = pixels[i] * 255.0f;
        buf[i] = static_cast<unsigned char>(std::lround(std::min(255.0f, std::max(0.0f, v))));
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw FormatError("failed writing: " + path);
}

std::vector<std::string> emit_thumbnails(const Tensor& images, const std::vector<int>& indices,
                                         const std::string& outdir, const std::string& prefix) {
    const int pixels = images.cols();
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(pixels))));
    if (side * side != pixels) {
        throw FormatError("emit_thumbnails: " + std::to_string(pixels) + " pixels per sample is not square");
    }
    fs::create_directories(outdir);
    std::vector<std::string> paths;
    paths.reserve(indices.size());
    for (const int idx : indices) {
        if (idx < 0 || idx >= images.rows()) {
            throw IndexError("emit_thumbnails: index " + std::to_string(idx) + " out of range");
        }
        const std::string path = (fs::path(outdir) / (prefix + std::to_string(idx) + ".pgm")).string();
        write_pgm(path, images.row(idx), side);
        paths.push_back(path);
    }
    return paths;
}

namespace {

std::string escape_html(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

std::string weights_str(const std::vector<double>& w) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i > 0) os << ", ";
        os << fmt_double(w[i]);
    }
    os << "]";
    return os.str();
}

nlohmann::json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + " is not valid JSON: " + e.what());
    }
    return j;
}

std::vector<fs::path> sorted_matches(const fs::path& dir, const std::string& stem_prefix) {
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.rfind(stem_prefix, 0) == 0 && entry.path().extension() == ".json") {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void append_image_cell(std::ostringstream& html, bool have_thumbs, const std::string& prefix, int index,
                       const std::string& caption, bool highlight) {
    html << "<td>";
    if (have_thumbs) {
        html << "<img src=\"thumbs/" << prefix << index << ".pgm\" width=\"56\" height=\"56\" alt=\""
             << prefix << index << "\"" << (highlight ? " style=\"border:3px solid red\"" : "") << " />";
        html << "<br />";
    }
    html << escape_html(caption) << "</td>\n";
}

}  // namespace

void emit_html_report(const std::string& results_dir) {
    const fs::path dir(results_dir);
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path)) {
        throw DataError("report inputs missing: " + manifest_path.string());
    }
    const DatasetManifest manifest = read_manifest(manifest_path.string());
    const Dataset data = load_dataset(manifest, results_dir);
    const bool have_thumbs = data.image_side > 0;

    const std::vector<fs::path> similar_files = sorted_matches(dir, "similar_");
    const std::vector<fs::path> concept_files = sorted_matches(dir, "concepts_");

    // Thumbnails for every index any section references.
    if (have_thumbs) {
        std::set<int> train_set;
        std::set<int> test_set;
        for (const fs::path& file : similar_files) {
            const nlohmann::json j = load_json(file);
            for (const auto& q : j.at("queries")) {
                test_set.insert(q.at("query_id").get<int>());
                for (const auto& r : q.at("ranked")) train_set.insert(r.at("train_index").get<int>());
            }
        }
        for (const fs::path& file : concept_files) {
            const nlohmann::json j = load_json(file);
            for (const auto& c : j.at("concepts")) {
                for (const auto& m : c.at("members")) train_set.insert(m.get<int>());
            }
        }
        const std::string thumbs = (dir / "thumbs").string();
        emit_thumbnails(data.train_x, std::vector<int>(train_set.begin(), train_set.end()), thumbs, "train_");
        emit_thumbnails(data.test_x, std::vector<int>(test_set.begin(), test_set.end()), thumbs, "test_");
    }

    std::ostringstream html;
    html << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\" />\n"
         << "<title>Activation clustering report</title>\n"
         << "<style>table { border-collapse: collapse; } td, th { border: 1px solid #999; padding: 4px; "
         << "text-align: center; } h2 { margin-top: 1.5em; }</style>\n</head>\n<body>\n"
         << "<h1>Activation clustering report</h1>\n";

    // Metrics table.
    html << "<h2>Surrogate metrics</h2>\n<table>\n<tr><th>Metric</th><th>Value</th></tr>\n";
    const fs::path eval_path = dir / "eval.json";
    if (fs::exists(eval_path)) {
        const nlohmann::json eval = load_json(eval_path);
        html << "<tr><td>accuracy</td><td>" << fmt_double(eval.at("accuracy").get<double>()) << "</td></tr>\n";
        html << "<tr><td>fidelity</td><td>" << fmt_double(eval.at("fidelity").get<double>()) << "</td></tr>\n";
        if (eval.contains("weights")) {
            html << "<tr><td>weights</td><td>"
                 << escape_html(weights_str(eval.at("weights").get<std::vector<double>>())) << "</td></tr>\n";
        }
    } else {
        html << "<tr><td>accuracy</td><td>n/a</td></tr>\n<tr><td>fidelity</td><td>n/a</td></tr>\n";
    }
    html << "</table>\n";

    auto class_name = [&](int label) {
        if (label >= 0 && label < static_cast<int>(manifest.classes.size())) return manifest.classes[static_cast<std::size_t>(label)];
        return std::to_string(label);
    };

    // One section per weight setting.
    for (const fs::path& file : similar_files) {
        const nlohmann::json j = load_json(file);
        const auto weights = j.at("weights").get<std::vector<double>>();
        html << "<h2>Similar training examples &#8212; weights " << escape_html(weights_str(weights))
             << "</h2>\n<table>\n";
        for (const auto& q : j.at("queries")) {
            const int query_id = q.at("query_id").get<int>();
            html << "<tr>\n";
            const int query_label = data.test_y.values[static_cast<std::size_t>(query_id)];
            append_image_cell(html, have_thumbs, "test_", query_id,
                              "query " + std::to_string(query_id) + " (" + class_name(query_label) + ")", true);
            for (const auto& r : q.at("ranked")) {
                const int idx = r.at("train_index").get<int>();
                const int label = data.train_y.values[static_cast<std::size_t>(idx)];
                append_image_cell(html, have_thumbs, "train_", idx,
                                  "#" + std::to_string(idx) + " (" + class_name(label) + ")", false);
            }
            html << "</tr>\n";
        }
        html << "</table>\n";
    }

    // One row per concept.
    for (const fs::path& file : concept_files) {
        const nlohmann::json j = load_json(file);
        html << "<h2>Concepts &#8212; " << escape_html(j.at("layer_name").get<std::string>()) << "</h2>\n"
             << "<table>\n";
        for (const auto& c : j.at("concepts")) {
            html << "<tr>\n<td>cluster " << c.at("cluster_index").get<int>() << "<br />purity "
                 << fmt_double(c.at("purity").get<double>()) << "</td>\n";
            for (const auto& m : c.at("members")) {
                const int idx = m.get<int>();
                const int label = data.train_y.values[static_cast<std::size_t>(idx)];
                append_image_cell(html, have_thumbs, "train_", idx,
                                  "#" + std::to_string(idx) + " (" + class_name(label) + ")", false);
            }
            html << "</tr>\n";
        }
        html << "</table>\n";
    }

    html << "</body>\n</html>\n";

    const fs::path out_path = dir / "report.html";
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + out_path.string());
    out << html.str();
    if (!out) throw FormatError("failed writing: " + out_path.string());
}

}  // namespace actclust
