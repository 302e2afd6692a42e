#include "lasted/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lasted/error.hpp"

namespace lasted::ad {

namespace {

double evaluate(const std::function<Tensor()>& loss_fn) {
    const double v = loss_fn().item();
    if (!std::isfinite(v)) {
        throw NonFiniteError("grad_check: non-finite loss at perturbed point");
    }
    return v;
}

}  // namespace

double grad_check(const std::function<Tensor()>& loss_fn, std::span<Tensor> params,
                  const GradCheckOptions& options) {
    if (!(options.fd_step > 0.0 && options.fd_step <= 1e-2)) {
        throw ArgumentError("grad_check: fd_step must lie in (0, 1e-2]");
    }
    for (auto& p : params) {
        p.set_requires_grad(true);
        p.zero_grad();
    }
    loss_fn().backward();

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) {
        if (p.has_grad()) {
            analytic.emplace_back(p.grad().begin(), p.grad().end());
        } else {
            analytic.emplace_back(p.numel(), 0.0);
        }
    }

    double worst = 0.0;
    const double h = options.fd_step;
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto values = params[p].mutable_data();
        const std::size_t n = values.size();
        std::size_t stride = 1;
        if (options.max_entries_per_param > 0 && n > options.max_entries_per_param) {
            stride = (n + options.max_entries_per_param - 1) / options.max_entries_per_param;
        }
        for (std::size_t i = 0; i < n; i += stride) {
            const double original = values[i];
            values[i] = original + h;
            const double up = evaluate(loss_fn);
            values[i] = original - h;
            const double down = evaluate(loss_fn);
            values[i] = original;
            const double numeric = (up - down) / (2.0 * h);
            const double err =
                std::abs(analytic[p][i] - numeric) / std::max(1.0, std::abs(numeric));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

void nudge_from_zero(Tensor& x, double margin) {
    for (double& v : x.mutable_data()) {
        if (std::abs(v) < margin) {
            v = v < 0.0 ? -margin : margin;
        }
    }
}

}  // namespace lasted::ad
