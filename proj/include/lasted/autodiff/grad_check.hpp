#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "lasted/autodiff/tensor.hpp"

namespace lasted::ad {

struct GradCheckOptions {
    double fd_step = 1e-3;
    /// Probe at most this many entries per parameter (0 = all), chosen with
    /// an even stride so large tensors stay affordable.
    std::size_t max_entries_per_param = 0;
};

/// Compares backward() against central finite differences of `loss_fn`.
/// Returns max |analytic - numeric| / max(1, |numeric|) over all probed
/// entries. `loss_fn` must rebuild the graph from `params` on every call.
double grad_check(const std::function<Tensor()>& loss_fn, std::span<Tensor> params,
                  const GradCheckOptions& options = {});

/// Pushes entries with |x| < margin out to +/-margin, so finite differences
/// through relu never straddle the kink.
void nudge_from_zero(Tensor& x, double margin = 1e-2);

}  // namespace lasted::ad
