#pragma once

#include <cstddef>
#include <span>

#include "lasted/autodiff/tensor.hpp"
#include "lasted/encoders/encoders.hpp"

namespace lasted::contrastive {

using ad::Tensor;
using encoders::EmbeddingBatch;

inline constexpr double kInitialInverseTemperature = 14.3;
inline constexpr double kMinInverseTemperature = 1.0;
inline constexpr double kMaxInverseTemperature = 100.0;

/// Learned temperature stored as s = ln(1/tau), so 1/tau = exp(s) stays
/// positive under unconstrained updates.
struct Temperature {
    Tensor log_inverse;

    static Temperature from_inverse(double inverse_temperature = kInitialInverseTemperature);
    double inverse() const;
};

/// Projects 1/tau back into [1, 100].
void clamp_temperature(Temperature& temperature);

struct LossValue {
    Tensor total;
    Tensor image_axis;
    Tensor text_axis;
};

/// Per-image softmax over the C label embeddings:
///   (1/N) sum_i -log( exp(I_i.T_{y_i}/tau) / sum_j exp(I_i.T_j/tau) )
/// `label_of_image[i]` is y_i, an index into the rows of `label_embeddings`.
Tensor image_axis_loss(const EmbeddingBatch& images, std::span<const std::size_t> label_of_image,
                       const EmbeddingBatch& label_embeddings, const Temperature& temperature);

/// Per-label softmax over the batch's images, with every image carrying that
/// label in the numerator:
///   (1/C) sum_j -log( sum_{k: y_k=j} exp(T_j.I_k/tau) / sum_i exp(T_j.I_i/tau) )
/// Every label must be carried by at least one image in the batch.
Tensor text_axis_loss(const EmbeddingBatch& images, std::span<const std::size_t> label_of_image,
                      const EmbeddingBatch& label_embeddings, const Temperature& temperature);

/// Sum of both axes; one backward pass reaches both encoders and tau.
LossValue total_loss(const EmbeddingBatch& images, std::span<const std::size_t> label_of_image,
                     const EmbeddingBatch& label_embeddings, const Temperature& temperature);

}  // namespace lasted::contrastive
