#include "lasted/autodiff/adam.hpp"

#include <cmath>
#include <string>

#include "lasted/error.hpp"

namespace lasted::ad {

void AdamState::init(std::span<const Tensor> params) {
    first_moment.clear();
    second_moment.clear();
    for (const auto& p : params) {
        first_moment.emplace_back(p.numel(), 0.0);
        second_moment.emplace_back(p.numel(), 0.0);
    }
    step = 0;
}

void adam_step(std::span<Tensor> params, std::span<const std::span<const double>> grads,
               AdamState& state) {
    if (!state.initialized()) {
        throw ArgumentError("adam_step: optimizer state not initialized");
    }
    if (params.size() != state.first_moment.size() || grads.size() != params.size()) {
        throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                         std::to_string(grads.size()) + " gradients, " +
                         std::to_string(state.first_moment.size()) + " moment slots");
    }
    for (std::size_t p = 0; p < params.size(); ++p) {
        const std::size_t n = params[p].numel();
        if (state.first_moment[p].size() != n || (!grads[p].empty() && grads[p].size() != n)) {
            throw ShapeError("adam_step: parameter " + std::to_string(p) + " has " +
                             std::to_string(n) + " elements but state/gradient disagree");
        }
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto values = params[p].mutable_data();
        auto& m = state.first_moment[p];
        auto& v = state.second_moment[p];
        const auto g = grads[p];
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double gi = g.empty() ? 0.0 : g[i];
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gi;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi;
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            values[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

void adam_step(std::span<Tensor> params, AdamState& state) {
    std::vector<std::span<const double>> grads;
    grads.reserve(params.size());
    for (const auto& p : params) {
        grads.push_back(p.grad());
    }
    adam_step(params, grads, state);
}

}  // namespace lasted::ad
