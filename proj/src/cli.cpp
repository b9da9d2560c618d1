#include "actclust/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "actclust/errors.hpp"
#include "actclust/explain.hpp"
#include "actclust/model_io.hpp"
#include "actclust/report.hpp"
#include "actclust/rng.hpp"
#include "actclust/surrogate.hpp"

namespace fs = std::filesystem;

namespace actclust {

void RunConfig::validate() const {
    if (out_dir.empty()) throw ConfigError("run config: out_dir must be set");
    if (dataset.type != "idx" && dataset.type != "blobs") {
        throw ConfigError("run config: dataset.type must be 'idx' or 'blobs'");
    }
    if (dec.size() != baseline.selected_layers.size()) {
        throw ConfigError("run config: " + std::to_string(dec.size()) + " dec configs for " +
                          std::to_string(baseline.selected_layers.size()) + " selected layers");
    }
    if (weights.size() != baseline.selected_layers.size()) {
        throw ConfigError("run config: " + std::to_string(weights.size()) + " weights for " +
                          std::to_string(baseline.selected_layers.size()) + " selected layers");
    }
    if (top_k <= 0) throw ConfigError("run config: top_k must be positive");
    if (concept_members <= 0) throw ConfigError("run config: concept_members must be positive");
    if (queries.empty() && n_queries <= 0) throw ConfigError("run config: n_queries must be positive");
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open run config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("run config is not valid JSON: " + std::string(e.what()));
    }

    RunConfig cfg;
    try {
        cfg.seed = j.value("seed", 0ull);
        cfg.out_dir = j.value("out_dir", "");

        const nlohmann::json& dj = j.at("dataset");
        cfg.dataset.type = dj.at("type").get<std::string>();
        if (cfg.dataset.type == "idx") {
            cfg.dataset.train_images = dj.at("train_images").get<std::string>();
            cfg.dataset.train_labels = dj.at("train_labels").get<std::string>();
            cfg.dataset.test_images = dj.at("test_images").get<std::string>();
            cfg.dataset.test_labels = dj.at("test_labels").get<std::string>();
            cfg.dataset.train_limit = dj.value("train_limit", 0);
            cfg.dataset.test_limit = dj.value("test_limit", 0);
        } else {
            cfg.dataset.k = dj.value("k", cfg.dataset.k);
            cfg.dataset.n_per_train = dj.value("n_per_train", cfg.dataset.n_per_train);
            cfg.dataset.n_per_test = dj.value("n_per_test", cfg.dataset.n_per_test);
            cfg.dataset.dim = dj.value("dim", cfg.dataset.dim);
            cfg.dataset.separation = dj.value("separation", cfg.dataset.separation);
        }
        cfg.dataset.classes = dj.value("classes", std::vector<std::string>{});

        const nlohmann::json& bj = j.at("baseline");
        cfg.baseline.layer_dims = bj.at("layer_dims").get<std::vector<int>>();
        cfg.baseline.epochs = bj.value("epochs", cfg.baseline.epochs);
        cfg.baseline.batch_size = bj.value("batch_size", cfg.baseline.batch_size);
        cfg.baseline.learning_rate = bj.value("learning_rate", cfg.baseline.learning_rate);
        cfg.baseline.momentum = bj.value("momentum", cfg.baseline.momentum);
        cfg.baseline.selected_layers = bj.at("selected_layers").get<std::vector<int>>();

        // "dec" is either one object applied to every selected layer or an
        // array with one entry per layer.
        const nlohmann::json& decj = j.at("dec");
        if (decj.is_array()) {
            for (const auto& entry : decj) cfg.dec.push_back(dec_config_from_json(entry));
        } else {
            for (std::size_t i = 0; i < cfg.baseline.selected_layers.size(); ++i) {
                cfg.dec.push_back(dec_config_from_json(decj));
            }
        }

        cfg.weights = j.value("weights", std::vector<double>(cfg.baseline.selected_layers.size(), 1.0));
        cfg.top_k = j.value("top_k", cfg.top_k);
        cfg.concept_members = j.value("concept_members", cfg.concept_members);
        cfg.n_queries = j.value("n_queries", cfg.n_queries);
        cfg.queries = j.value("queries", std::vector<int>{});
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("run config missing required key: " + std::string(e.what()));
    }
    cfg.validate();
    return cfg;
}

namespace {

struct Run {
    RunConfig cfg;
    fs::path out;

    fs::path manifest_path() const { return out / "manifest.json"; }
    fs::path baseline_model_path() const { return out / "baseline.model"; }
    fs::path baseline_report_path() const { return out / "baseline.json"; }
    fs::path acts_path(const std::string& split, int layer) const {
        return out / ("acts_" + split + "_" + activation_name(layer) + ".actv");
    }
    fs::path cluster_model_path(int layer) const {
        return out / ("cluster_" + activation_name(layer) + ".model");
    }
    fs::path embeddings_path(int layer) const {
        return out / ("emb_train_" + activation_name(layer) + ".actv");
    }
    fs::path surrogate_path() const { return out / "surrogate.json"; }
    fs::path eval_path() const { return out / "eval.json"; }
    fs::path concepts_path(int layer) const {
        return out / ("concepts_" + activation_name(layer) + ".json");
    }
};

std::string fmt_weight(double w) {
    if (w == static_cast<double>(static_cast<long long>(w))) {
        return std::to_string(static_cast<long long>(w));
    }
    std::ostringstream os;
    os << w;
    return os.str();
}

std::string weights_tag(const std::vector<double>& weights) {
    std::string tag = "w";
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (i > 0) tag += "-";
        tag += fmt_weight(weights[i]);
    }
    return tag;
}

fs::path similar_path(const Run& run, const std::vector<double>& weights) {
    return run.out / ("similar_" + weights_tag(weights) + ".json");
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw FormatError("failed writing: " + path.string());
}

void require_file(const fs::path& path, const std::string& producer) {
    if (!fs::exists(path)) {
        throw DataError("missing " + path.string() + "; run '" + producer + "' first");
    }
}

Tensor limit_rows(Tensor t, int limit) {
    if (limit <= 0 || limit >= t.rows()) return t;
    Tensor out({limit, t.cols()});
    std::copy(t.data.begin(), t.data.begin() + static_cast<std::ptrdiff_t>(out.size()), out.data.begin());
    return out;
}

LabelArray limit_labels(LabelArray labels, int limit) {
    if (limit > 0 && limit < labels.count()) labels.values.resize(static_cast<std::size_t>(limit));
    return labels;
}

// Builds the working dataset in memory from the configured source.
Dataset build_source_dataset(const Run& run) {
    const RunConfig::DatasetSpec& spec = run.cfg.dataset;
    Dataset data;
    if (spec.type == "idx") {
        for (const std::string& p : {spec.train_images, spec.train_labels, spec.test_images, spec.test_labels}) {
            if (!fs::exists(p)) throw DataError("dataset file does not exist: " + p);
        }
        data.train_x = limit_rows(read_idx_images(spec.train_images), spec.train_limit);
        data.train_y = limit_labels(read_idx_labels(spec.train_labels), spec.train_limit);
        data.test_x = limit_rows(read_idx_images(spec.test_images), spec.test_limit);
        data.test_y = limit_labels(read_idx_labels(spec.test_labels), spec.test_limit);
        int n_classes = 0;
        for (const int y : data.train_y.values) n_classes = std::max(n_classes, y + 1);
        for (const int y : data.test_y.values) n_classes = std::max(n_classes, y + 1);
        for (int c = 0; c < n_classes; ++c) data.classes.push_back(std::to_string(c));
    } else {
        const Blobs train = make_blobs(spec.k, spec.n_per_train, spec.dim, spec.separation,
                                       derive_seed(run.cfg.seed, "blobs-train"));
        const Blobs test = make_blobs(spec.k, spec.n_per_test, spec.dim, spec.separation,
                                      derive_seed(run.cfg.seed, "blobs-test"));
        data.train_x = train.points;
        data.train_y = train.labels;
        data.test_x = test.points;
        data.test_y = test.labels;
        for (int c = 0; c < spec.k; ++c) data.classes.push_back("blob" + std::to_string(c));
    }
    if (!spec.classes.empty()) {
        if (static_cast<int>(spec.classes.size()) < data.n_classes()) {
            throw ConfigError("dataset.classes lists fewer names than observed classes");
        }
        data.classes = spec.classes;
    }
    return data;
}

Dataset load_run_dataset(const Run& run) {
    require_file(run.manifest_path(), "train-baseline");
    return load_dataset(read_manifest(run.manifest_path().string()), run.out.string());
}

std::string checksum_hex(std::uint64_t checksum) {
    std::ostringstream os;
    os << std::hex << checksum;
    return os.str();
}

TrainedBaseline load_run_baseline(const Run& run, const DatasetManifest& manifest) {
    require_file(run.baseline_model_path(), "train-baseline");
    TrainedBaseline model = load_baseline(run.baseline_model_path().string());
    if (checksum_hex(model.checksum) != manifest.baseline_checksum) {
        throw DataError("baseline model checksum does not match manifest");
    }
    return model;
}

int cmd_train_baseline(const Run& run) {
    fs::create_directories(run.out);
    Dataset data = build_source_dataset(run);

    // Materialize the working dataset so every later stage reads the exact
    // same bytes.
    write_dump(ActivationDump::from_tensor("train.images", data.train_x), (run.out / "train_images.actv").string());
    write_idx_labels((run.out / "train_labels.idx").string(), data.train_y);
    write_dump(ActivationDump::from_tensor("test.images", data.test_x), (run.out / "test_images.actv").string());
    write_idx_labels((run.out / "test_labels.idx").string(), data.test_y);

    BaselineConfig bc = run.cfg.baseline;
    bc.seed = derive_seed(run.cfg.seed, "baseline");
    const TrainedBaseline model = train_baseline(bc, data);
    save_baseline(model, run.baseline_model_path().string());

    DatasetManifest manifest;
    manifest.splits["train"] = {data.train_x.rows(), "train_images.actv", "train_labels.idx", "actv"};
    manifest.splits["test"] = {data.test_x.rows(), "test_images.actv", "test_labels.idx", "actv"};
    manifest.classes = data.classes;
    manifest.files["baseline_model"] = "baseline.model";
    for (const int layer : run.cfg.baseline.selected_layers) {
        const std::string name = activation_name(layer);
        manifest.files["activations_train_" + name] = run.acts_path("train", layer).filename().string();
        manifest.files["activations_test_" + name] = run.acts_path("test", layer).filename().string();
        manifest.files["cluster_model_" + name] = run.cluster_model_path(layer).filename().string();
        manifest.files["embeddings_" + name] = run.embeddings_path(layer).filename().string();
    }
    manifest.baseline_checksum = checksum_hex(model.checksum);
    write_manifest(manifest, run.manifest_path().string());

    write_json_file(run.baseline_report_path(),
                    {{"train_accuracy", model.train_accuracy},
                     {"test_accuracy", model.test_accuracy},
                     {"loss_curve", model.loss_curve},
                     {"epochs", bc.epochs},
                     {"layer_dims", bc.layer_dims},
                     {"checksum", checksum_hex(model.checksum)}});
    return 0;
}

int cmd_dump_activations(const Run& run) {
    const DatasetManifest manifest = read_manifest(run.manifest_path().string());
    const Dataset data = load_run_dataset(run);
    const TrainedBaseline model = load_run_baseline(run, manifest);

    const std::vector<int>& selected = run.cfg.baseline.selected_layers;
    const std::vector<ActivationDump> train_dumps = extract_activations(model.network, data.train_x, selected);
    const std::vector<ActivationDump> test_dumps = extract_activations(model.network, data.test_x, selected);
    for (std::size_t i = 0; i < selected.size(); ++i) {
        write_dump(train_dumps[i], run.acts_path("train", selected[i]).string());
        write_dump(test_dumps[i], run.acts_path("test", selected[i]).string());
    }
    return 0;
}

int cmd_train_clusters(const Run& run) {
    read_manifest(run.manifest_path().string());
    const std::vector<int>& selected = run.cfg.baseline.selected_layers;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        const int layer = selected[i];
        require_file(run.acts_path("train", layer), "dump-activations");
        const ActivationDump dump = read_dump(run.acts_path("train", layer).string());

        DECConfig dc = run.cfg.dec[i];
        dc.seed = derive_seed(run.cfg.seed, "dec-" + activation_name(layer));
        const ClusterModel model = train_cluster_model(dump, dc);
        save_cluster_model(model, run.cluster_model_path(layer).string());

        const Tensor embeddings = encode(model, dump);
        write_dump(ActivationDump::from_tensor(activation_name(layer) + ".emb", embeddings),
                   run.embeddings_path(layer).string());
    }
    return 0;
}

int cmd_build_surrogate(const Run& run) {
    const DatasetManifest manifest = read_manifest(run.manifest_path().string());
    const Dataset data = load_run_dataset(run);
    const std::vector<int>& selected = run.cfg.baseline.selected_layers;

    nlohmann::json layers = nlohmann::json::array();
    for (const int layer : selected) {
        require_file(run.cluster_model_path(layer), "train-clusters");
        require_file(run.embeddings_path(layer), "train-clusters");
        const ClusterModel model = load_cluster_model(run.cluster_model_path(layer).string());
        const ActivationDump emb = read_dump(run.embeddings_path(layer).string());
        const SoftAssignment q = soft_assign(emb.data, model.centroids, model.config.alpha);
        const EmpiricalPosterior posterior = fit_posterior(q, data.train_y, data.n_classes());

        std::vector<std::vector<double>> rows;
        rows.reserve(static_cast<std::size_t>(posterior.matrix.rows()));
        for (int k = 0; k < posterior.matrix.rows(); ++k) {
            std::vector<double> row;
            for (int c = 0; c < posterior.matrix.cols(); ++c) {
                row.push_back(static_cast<double>(posterior.matrix.at(k, c)));
            }
            rows.push_back(std::move(row));
        }
        layers.push_back({{"layer_name", activation_name(layer)},
                          {"cluster_model", run.cluster_model_path(layer).filename().string()},
                          {"posterior", rows},
                          {"epsilon", posterior.epsilon}});
    }
    write_json_file(run.surrogate_path(), {{"layers", layers},
                                           {"weights", run.cfg.weights},
                                           {"n_classes", data.n_classes()},
                                           {"baseline_checksum", manifest.baseline_checksum}});
    return 0;
}

std::vector<Tensor> load_split_activations(const Run& run, const std::string& split) {
    std::vector<Tensor> acts;
    for (const int layer : run.cfg.baseline.selected_layers) {
        require_file(run.acts_path(split, layer), "dump-activations");
        acts.push_back(read_dump(run.acts_path(split, layer).string()).data);
    }
    return acts;
}

int cmd_evaluate(const Run& run, std::ostream& out) {
    const DatasetManifest manifest = read_manifest(run.manifest_path().string());
    const Dataset data = load_run_dataset(run);
    const TrainedBaseline baseline = load_run_baseline(run, manifest);
    const FullSurrogate surrogate = load_surrogate_artifacts(run.out.string(), data.n_classes());

    const std::vector<Tensor> test_acts = load_split_activations(run, "test");
    const std::vector<int> baseline_pred = predict_class(baseline.network, data.test_x);
    const EvalReport report = evaluate(surrogate, test_acts, data.test_y, baseline_pred);

    write_json_file(run.eval_path(), {{"accuracy", report.accuracy},
                                      {"fidelity", report.fidelity},
                                      {"confusion", report.confusion},
                                      {"weights", surrogate.weights}});
    out << nlohmann::json({{"accuracy", report.accuracy}, {"fidelity", report.fidelity}}).dump() << "\n";
    return 0;
}

std::vector<int> pick_queries(const Run& run, int n_test) {
    if (!run.cfg.queries.empty()) {
        for (const int q : run.cfg.queries) {
            if (q < 0 || q >= n_test) {
                throw ConfigError("query index " + std::to_string(q) + " out of range [0, " +
                                  std::to_string(n_test) + ")");
            }
        }
        return run.cfg.queries;
    }
    const int want = std::min(run.cfg.n_queries, n_test);
    Rng rng(derive_seed(run.cfg.seed, "queries"));
    std::set<int> picked;
    while (static_cast<int>(picked.size()) < want) picked.insert(rng.uniform_int(n_test));
    return std::vector<int>(picked.begin(), picked.end());
}

int cmd_explain(const Run& run, const std::vector<double>& weights, int top_k) {
    read_manifest(run.manifest_path().string());
    const Dataset data = load_run_dataset(run);
    const std::vector<int>& selected = run.cfg.baseline.selected_layers;

    std::vector<Tensor> train_embeddings;
    std::vector<ClusterModel> models;
    for (const int layer : selected) {
        require_file(run.cluster_model_path(layer), "train-clusters");
        require_file(run.embeddings_path(layer), "train-clusters");
        models.push_back(load_cluster_model(run.cluster_model_path(layer).string()));
        train_embeddings.push_back(read_dump(run.embeddings_path(layer).string()).data);
    }
    const std::vector<Tensor> test_acts = load_split_activations(run, "test");

    const std::vector<int> queries = pick_queries(run, data.test_x.rows());
    nlohmann::json queries_json = nlohmann::json::array();
    for (const int query : queries) {
        std::vector<Tensor> query_embeddings;
        for (std::size_t j = 0; j < selected.size(); ++j) {
            query_embeddings.push_back(encode(models[j].encoder, gather_rows(test_acts[j], {query})));
        }
        const SimilarityResult result = rank_similar(query_embeddings, train_embeddings, weights, top_k, query);

        nlohmann::json ranked = nlohmann::json::array();
        for (const RankedExample& ex : result.ranked) {
            ranked.push_back({{"train_index", ex.train_index},
                              {"score", ex.combined_score},
                              {"per_layer_distances", ex.per_layer_distances}});
        }
        queries_json.push_back({{"query_id", query}, {"ranked", ranked}});
    }

    write_json_file(similar_path(run, weights),
                    {{"weights", weights}, {"top_k", top_k}, {"queries", queries_json}});
    return 0;
}

int cmd_concepts(const Run& run) {
    read_manifest(run.manifest_path().string());
    const Dataset data = load_run_dataset(run);
    const std::vector<int>& selected = run.cfg.baseline.selected_layers;

    for (const int layer : selected) {
        require_file(run.cluster_model_path(layer), "train-clusters");
        require_file(run.embeddings_path(layer), "train-clusters");
        const ClusterModel model = load_cluster_model(run.cluster_model_path(layer).string());
        const ActivationDump emb = read_dump(run.embeddings_path(layer).string());

        const std::vector<Concept> concepts =
            extract_concepts(model, emb.data, data.train_y, data.n_classes(), run.cfg.concept_members);
        const std::vector<double> purity = concept_purity(concepts);

        nlohmann::json concepts_json = nlohmann::json::array();
        for (std::size_t i = 0; i < concepts.size(); ++i) {
            concepts_json.push_back({{"cluster_index", concepts[i].cluster_index},
                                     {"members", concepts[i].members},
                                     {"member_distances", concepts[i].member_distances},
                                     {"label_histogram", concepts[i].label_histogram},
                                     {"mean_member_distance", concepts[i].mean_member_distance},
                                     {"purity", purity[i]}});
        }
        write_json_file(run.concepts_path(layer), {{"layer_name", activation_name(layer)},
                                                   {"m", run.cfg.concept_members},
                                                   {"concepts", concepts_json},
                                                   {"mean_purity", mean_concept_purity(concepts)}});
    }
    return 0;
}

int cmd_report(const Run& run) {
    emit_html_report(run.out.string());
    return 0;
}

std::vector<double> parse_weights_flag(const std::string& raw) {
    std::vector<double> weights;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            weights.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse --weights entry '" + item + "'");
        }
    }
    if (weights.empty()) throw ConfigError("--weights must list at least one value");
    return weights;
}

}  // namespace

FullSurrogate load_surrogate_artifacts(const std::string& run_dir, int n_classes) {
    const fs::path dir(run_dir);
    const fs::path surrogate_path = dir / "surrogate.json";
    require_file(surrogate_path, "build-surrogate");
    nlohmann::json j;
    {
        std::ifstream in(surrogate_path);
        in >> j;
    }

    FullSurrogate surrogate;
    surrogate.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& lj : j.at("layers")) {
        LayerSurrogate layer;
        layer.cluster_model = load_cluster_model((dir / lj.at("cluster_model").get<std::string>()).string());
        const auto rows = lj.at("posterior").get<std::vector<std::vector<double>>>();
        layer.posterior.epsilon = lj.at("epsilon").get<double>();
        layer.posterior.matrix = Tensor({static_cast<int>(rows.size()), n_classes});
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (static_cast<int>(rows[k].size()) != n_classes) {
                throw FormatError("surrogate posterior row width does not match class count");
            }
            for (int c = 0; c < n_classes; ++c) {
                layer.posterior.matrix.at(static_cast<int>(k), c) =
                    static_cast<float>(rows[k][static_cast<std::size_t>(c)]);
            }
        }
        surrogate.layers.push_back(std::move(layer));
    }
    surrogate.validate();
    return surrogate;
}

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"activation clustering surrogate pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::string weights_flag;
    std::uint64_t seed_override = 0;
    int top_k_override = 0;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"train-baseline", "train the baseline classifier and write the run manifest"},
        {"dump-activations", "export selected-layer activations for train and test splits"},
        {"train-clusters", "train one clustering model per selected layer"},
        {"build-surrogate", "fit empirical posteriors and assemble the full surrogate"},
        {"evaluate", "compute surrogate accuracy and fidelity on the test split"},
        {"explain", "rank similar training examples for query test samples"},
        {"concepts", "extract per-layer concepts and their purity"},
        {"report", "render report.html from the run artifacts"},
    };
    for (const auto& [name, desc] : commands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "run configuration JSON")->required();
        sub->add_option("--out", out_override, "override the configured output directory");
        sub->add_option("--seed", seed_override, "override the configured seed");
        if (name == "explain") {
            sub->add_option("--weights", weights_flag, "comma-separated layer weights");
            sub->add_option("--top-k", top_k_override, "number of similar examples per query");
        }
    }

    try {
        std::vector<std::string> args(argv.rbegin(), argv.rend());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return 1;
    }

    try {
        const CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();

        Run run;
        run.cfg = load_run_config(config_path);
        if (!out_override.empty()) run.cfg.out_dir = out_override;
        if (sub->count("--seed") > 0) run.cfg.seed = seed_override;
        run.out = run.cfg.out_dir;
        if (name == "train-baseline") return cmd_train_baseline(run);
        if (name == "dump-activations") return cmd_dump_activations(run);
        if (name == "train-clusters") return cmd_train_clusters(run);
        if (name == "build-surrogate") return cmd_build_surrogate(run);
        if (name == "evaluate") return cmd_evaluate(run, out);
        if (name == "explain") {
            const std::vector<double> weights =
                weights_flag.empty() ? run.cfg.weights : parse_weights_flag(weights_flag);
            if (weights.size() != run.cfg.baseline.selected_layers.size()) {
                throw ConfigError("--weights needs " +
                                  std::to_string(run.cfg.baseline.selected_layers.size()) + " values");
            }
            return cmd_explain(run, weights, top_k_override > 0 ? top_k_override : run.cfg.top_k);
        }
        if (name == "concepts") return cmd_concepts(run);
        if (name == "report") return cmd_report(run);
        err << "unknown subcommand: " << name << "\n";
        return 1;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace actclust
