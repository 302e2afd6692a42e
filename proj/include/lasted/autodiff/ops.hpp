#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lasted/autodiff/tensor.hpp"

namespace lasted::ad {

// Elementwise arithmetic. Binary operands must share a shape.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor add_constant(const Tensor& x, double offset);
/// x multiplied by the single value held in `factor` (rank 0 or one element).
Tensor mul_scalar(const Tensor& x, const Tensor& factor);
Tensor exp(const Tensor& x);
Tensor relu(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor dot(const Tensor& a, const Tensor& b);

/// [m x k] . [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);
/// [m x n] + row vector [n], broadcast over rows.
Tensor add_row_vector(const Tensor& x, const Tensor& row);

/// Valid (unpadded) cross-correlation. x: [b x c x h x w], k: [o x c x kh x kw].
Tensor conv2d(const Tensor& x, const Tensor& kernel, std::size_t stride);
std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t stride);
/// [b x c x h x w] + bias [c] per channel.
Tensor add_channel_bias(const Tensor& x, const Tensor& bias);
/// [b x c x h x w] -> [b x c]
Tensor global_avg_pool(const Tensor& x);

/// Divides every slice along `axis` by its Euclidean norm.
Tensor l2_normalize(const Tensor& x, std::size_t axis);
/// Stable log(sum(exp(x))) along `axis`; the axis is removed from the shape.
Tensor log_sum_exp(const Tensor& x, std::size_t axis);
/// log_sum_exp restricted to entries where `mask` is non-zero. Every slice
/// must keep at least one entry.
Tensor log_sum_exp_masked(const Tensor& x, std::size_t axis, std::span<const unsigned char> mask);

/// Picks x[flat_indices[i]] into a rank-1 tensor.
Tensor gather(const Tensor& x, std::span<const std::size_t> flat_indices);

}  // namespace lasted::ad
