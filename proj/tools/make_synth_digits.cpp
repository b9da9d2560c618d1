// Writes a self-contained digit dataset in IDX format, for running the
// pipeline without downloading MNIST.
//
//   make_synth_digits <outdir> [n_train] [n_test] [seed]

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include "actclust/rng.hpp"
#include "actclust/store.hpp"
#include "actclust/synthdigits.hpp"

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: make_synth_digits <outdir> [n_train] [n_test] [seed]\n";
        return 1;
    }
    const std::string outdir = argv[1];
    const int n_train = argc > 2 ? std::stoi(argv[2]) : 10000;
    const int n_test = argc > 3 ? std::stoi(argv[3]) : 2000;
    const std::uint64_t seed = argc > 4 ? std::stoull(argv[4]) : 42;

    try {
        std::filesystem::create_directories(outdir);
        const auto train = actclust::make_synth_digits(n_train, actclust::derive_seed(seed, "synth-train"));
        const auto test = actclust::make_synth_digits(n_test, actclust::derive_seed(seed, "synth-test"));
        actclust::write_idx_images(outdir + "/train-images-idx3-ubyte", train.images, 28, 28);
        actclust::write_idx_labels(outdir + "/train-labels-idx1-ubyte", train.labels);
        actclust::write_idx_images(outdir + "/t10k-images-idx3-ubyte", test.images, 28, 28);
        actclust::write_idx_labels(outdir + "/t10k-labels-idx1-ubyte", test.labels);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cout << "wrote " << n_train << " train and " << n_test << " test digits to " << outdir << "\n";
    return 0;
}
