#pragma once

#include <vector>

#include "actclust/nn.hpp"

namespace actclust {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t checks = 0;
};

// Guarded relative error: |a - b| / max(|a|, |b|, scale_floor). The floor
// turns the comparison absolute for gradients below that scale, where float32
// rounding dominates.
double guarded_rel_err(double a, double b, double scale_floor = 1e-2);

// Central finite differences of the mean cross-entropy loss, evaluated with a
// double-precision forward replica that is independent of the float32 path.
// Compares against backprop() for every parameter and every input entry.
GradCheckReport check_network_gradients(const Network& net, const Tensor& x, const std::vector<int>& labels,
                                        double eps = 1e-3);

// Double-precision loss of the network on (x, labels); exposed for oracles.
double loss_fd(const Network& net, const Tensor& x, const std::vector<int>& labels);

// Smallest |pre-activation| feeding any relu in the forward pass. Finite
// differences are only a valid derivative oracle when this margin comfortably
// exceeds the perturbation size.
double min_relu_margin(const Network& net, const Tensor& x);

}  // namespace actclust
