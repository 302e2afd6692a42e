#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lasted/autodiff/tensor.hpp"

namespace lasted::ad {

/// Moment accumulators for the Adam update. Defaults follow the usual
/// published constants (beta1 0.9, beta2 0.999, eps 1e-8).
struct AdamState {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;

    /// Allocates zeroed moments matching `params`.
    void init(std::span<const Tensor> params);
    bool initialized() const { return !first_moment.empty(); }
};

/// One bias-corrected Adam update using the gradients accumulated on
/// `params`. Parameters without a gradient are treated as having a zero one.
void adam_step(std::span<Tensor> params, AdamState& state);

/// Same update with gradients supplied explicitly (one span per parameter).
void adam_step(std::span<Tensor> params, std::span<const std::span<const double>> grads,
               AdamState& state);

}  // namespace lasted::ad
