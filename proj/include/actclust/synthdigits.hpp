#pragma once

#include <cstdint>

#include "actclust/store.hpp"
#include "actclust/tensor.hpp"

namespace actclust {

// Procedurally rendered 28x28 digit images in the MNIST layout: vector glyphs
// with per-sample translation, rotation, scale, stroke-width, ink and pixel
// noise. Useful wherever a self-contained image classification dataset is
// needed.
struct SynthDigitsConfig {
    int max_shift = 3;          // uniform pixel translation in each axis
    double max_rotate = 0.20;   // radians
    double min_scale = 0.80;
    double max_scale = 1.10;
    double min_thickness = 1.1; // stroke half-width in pixels
    double max_thickness = 2.0;
    double min_ink = 0.65;
    double noise_sigma = 0.05;
};

struct SynthDigits {
    Tensor images;  // [n, 784], values in [0, 1]
    LabelArray labels;
};

SynthDigits make_synth_digits(int n, std::uint64_t seed, const SynthDigitsConfig& cfg = {});

// Renders one digit class with explicit transform parameters.
void render_digit(int digit, float* out_28x28, double dx, double dy, double rotate, double scale,
                  double thickness, double ink);

}  // namespace actclust
