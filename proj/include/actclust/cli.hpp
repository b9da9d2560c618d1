#pragma once

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "actclust/baseline.hpp"
#include "actclust/dec.hpp"
#include "actclust/surrogate.hpp"

namespace actclust {

// Parsed run configuration JSON. One file drives every subcommand; all
// randomness derives from the single seed.
struct RunConfig {
    std::uint64_t seed = 0;
    std::string out_dir;

    struct DatasetSpec {
        std::string type;  // "idx" or "blobs"
        // idx
        std::string train_images;
        std::string train_labels;
        std::string test_images;
        std::string test_labels;
        int train_limit = 0;  // 0 keeps everything
        int test_limit = 0;
        std::vector<std::string> classes;  // optional names
        // blobs
        int k = 3;
        int n_per_train = 200;
        int n_per_test = 40;
        int dim = 20;
        double separation = 50.0;
    };
    DatasetSpec dataset;

    BaselineConfig baseline;
    std::vector<DECConfig> dec;  // one per selected layer
    std::vector<double> weights;
    int top_k = 10;
    int concept_members = 10;
    int n_queries = 5;
    std::vector<int> queries;  // explicit test indices; drawn from the seed when empty

    void validate() const;
};

RunConfig load_run_config(const std::string& path);

// Entry point behind the actclust binary. argv excludes the program name.
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numeric
// failure.
int run_cli(const std::vector<std::string>& argv, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

// Reassembles the full surrogate described by a run directory's
// surrogate.json and cluster model files.
FullSurrogate load_surrogate_artifacts(const std::string& run_dir, int n_classes);

}  // namespace actclust
