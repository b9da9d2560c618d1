#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "actclust/cli.hpp"
#include "test_support.hpp"

using namespace actclust;
using testsupport::TempDir;

namespace {

// Minimal blob pipeline: three tapped layers, three clusters each.
nlohmann::json blob_run_config(const std::string& out_dir) {
    return {
        {"seed", 9},
        {"out_dir", out_dir},
        {"dataset",
         {{"type", "blobs"}, {"k", 3}, {"n_per_train", 40}, {"n_per_test", 10}, {"dim", 8}, {"separation", 15.0}}},
        {"baseline",
         {{"layer_dims", {8, 12, 6, 3}},
          {"epochs", 20},
          {"batch_size", 16},
          {"learning_rate", 0.02},
          {"momentum", 0.9},
          {"selected_layers", {1, 2, 3}}}},
        {"dec",
         {{{"embedding_dim", 4}, {"n_clusters", 3}, {"hidden_dim", 16}, {"ae_epochs", 25}, {"dec_max_epochs", 8}, {"learning_rate", 0.003}, {"batch_size", 32}},
          {{"embedding_dim", 3}, {"n_clusters", 3}, {"hidden_dim", 16}, {"ae_epochs", 25}, {"dec_max_epochs", 8}, {"learning_rate", 0.003}, {"batch_size", 32}},
          {{"embedding_dim", 2}, {"n_clusters", 3}, {"hidden_dim", 16}, {"ae_epochs", 25}, {"dec_max_epochs", 8}, {"learning_rate", 0.003}, {"batch_size", 32}}}},
        {"weights", {1.0, 1.0, 1.0}},
        {"top_k", 5},
        {"concept_members", 5},
        {"n_queries", 3},
    };
}

int run(const std::vector<std::string>& args, std::string* stdout_text = nullptr) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    if (stdout_text) *stdout_text = out.str();
    INFO("stderr: ", err.str());
    return code;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct CliFixture {
    TempDir dir{"cli_pipeline"};
    std::string config_path;

    CliFixture() {
        config_path = dir.file("run.json");
        std::ofstream(config_path) << blob_run_config(dir.file("out")).dump(2);
    }

    std::filesystem::path out(const std::string& name) const {
        return std::filesystem::path(dir.file("out")) / name;
    }
};

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("full blob pipeline runs end to end") {
    CliFixture fx;
    CHECK(run({"train-baseline", "--config", fx.config_path}) == 0);
    CHECK(std::filesystem::exists(fx.out("manifest.json")));
    CHECK(std::filesystem::exists(fx.out("baseline.model")));

    CHECK(run({"dump-activations", "--config", fx.config_path}) == 0);
    CHECK(std::filesystem::exists(fx.out("acts_train_layer1.actv")));
    CHECK(std::filesystem::exists(fx.out("acts_test_layer3.actv")));

    CHECK(run({"train-clusters", "--config", fx.config_path}) == 0);
    CHECK(std::filesystem::exists(fx.out("cluster_layer2.model")));
    CHECK(std::filesystem::exists(fx.out("emb_train_layer2.actv")));

    CHECK(run({"build-surrogate", "--config", fx.config_path}) == 0);
    CHECK(std::filesystem::exists(fx.out("surrogate.json")));

    std::string eval_stdout;
    CHECK(run({"evaluate", "--config", fx.config_path}, &eval_stdout) == 0);
    const nlohmann::json metrics = nlohmann::json::parse(eval_stdout);
    CHECK(metrics.at("fidelity").get<double>() >= 0.0);
    CHECK(metrics.at("fidelity").get<double>() <= 1.0);
    CHECK(metrics.at("accuracy").get<double>() >= 0.0);
    CHECK(metrics.at("accuracy").get<double>() <= 1.0);
    CHECK(std::filesystem::exists(fx.out("eval.json")));

    CHECK(run({"explain", "--config", fx.config_path}) == 0);
    CHECK(std::filesystem::exists(fx.out("similar_w1-1-1.json")));

    CHECK(run({"concepts", "--config", fx.config_path}) == 0);
    CHECK(std::filesystem::exists(fx.out("concepts_layer1.json")));
    CHECK(std::filesystem::exists(fx.out("concepts_layer3.json")));

    CHECK(run({"report", "--config", fx.config_path}) == 0);
    CHECK(std::filesystem::exists(fx.out("report.html")));

    SUBCASE("explain weight-scale invariance produces identical rankings") {
        CHECK(run({"explain", "--config", fx.config_path, "--weights", "1,0,0"}) == 0);
        CHECK(run({"explain", "--config", fx.config_path, "--weights", "2,0,0"}) == 0);
        const nlohmann::json a = nlohmann::json::parse(slurp(fx.out("similar_w1-0-0.json")));
        const nlohmann::json b = nlohmann::json::parse(slurp(fx.out("similar_w2-0-0.json")));
        REQUIRE(a.at("queries").size() == b.at("queries").size());
        for (std::size_t q = 0; q < a.at("queries").size(); ++q) {
            const auto& ra = a.at("queries")[q].at("ranked");
            const auto& rb = b.at("queries")[q].at("ranked");
            REQUIRE(ra.size() == rb.size());
            for (std::size_t i = 0; i < ra.size(); ++i) {
                CHECK(ra[i].at("train_index") == rb[i].at("train_index"));
            }
        }
    }

    SUBCASE("rerunning subcommands is byte-identical") {
        const std::string eval_before = slurp(fx.out("eval.json"));
        const std::string similar_before = slurp(fx.out("similar_w1-1-1.json"));
        const std::string concepts_before = slurp(fx.out("concepts_layer2.json"));
        CHECK(run({"evaluate", "--config", fx.config_path}) == 0);
        CHECK(run({"explain", "--config", fx.config_path}) == 0);
        CHECK(run({"concepts", "--config", fx.config_path}) == 0);
        CHECK(slurp(fx.out("eval.json")) == eval_before);
        CHECK(slurp(fx.out("similar_w1-1-1.json")) == similar_before);
        CHECK(slurp(fx.out("concepts_layer2.json")) == concepts_before);
    }

    SUBCASE("subcommands leave their input files untouched") {
        const std::string manifest_before = slurp(fx.out("manifest.json"));
        const std::string baseline_before = slurp(fx.out("baseline.model"));
        CHECK(run({"evaluate", "--config", fx.config_path}) == 0);
        CHECK(run({"report", "--config", fx.config_path}) == 0);
        CHECK(slurp(fx.out("manifest.json")) == manifest_before);
        CHECK(slurp(fx.out("baseline.model")) == baseline_before);
    }
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run({"no-such-command"}) == 1);
    CHECK(run({"evaluate"}) == 1);  // missing --config
    CHECK(run({}) == 1);
}

TEST_CASE("missing artifacts exit with code 2") {
    CliFixture fx;
    CHECK(run({"evaluate", "--config", fx.config_path}) == 2);
    CHECK(run({"report", "--config", fx.config_path}) == 2);
}

TEST_CASE("invalid config values exit with code 1") {
    TempDir dir("cli_badcfg");
    nlohmann::json cfg = blob_run_config(dir.file("out"));
    cfg["top_k"] = 0;
    const std::string path = dir.file("bad.json");
    std::ofstream(path) << cfg.dump(2);
    CHECK(run({"train-baseline", "--config", path}) == 1);
}

TEST_CASE("corrupted model files exit with code 2") {
    CliFixture fx;
    REQUIRE(run({"train-baseline", "--config", fx.config_path}) == 0);
    {
        std::fstream f(fx.out("baseline.model"), std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.put('Z');
    }
    CHECK(run({"dump-activations", "--config", fx.config_path}) == 2);
}

TEST_CASE("help exits cleanly") {
    std::string text;
    CHECK(run({"--help"}, &text) == 0);
    CHECK(text.find("train-baseline") != std::string::npos);
}

TEST_SUITE_END();
