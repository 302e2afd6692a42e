#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lasted/autodiff/tensor.hpp"
#include "lasted/encoders/encoders.hpp"

namespace lasted::baselines {

using ad::Tensor;
using encoders::EmbeddingBatch;

enum class Paradigm { Lasted, Classification, ImageContrastive };

Paradigm parse_paradigm(std::string_view name);
std::string paradigm_name(Paradigm paradigm);

/// Linear classifier over image embeddings.
struct ClassificationHead {
    Tensor weight;  // [d x C]
    Tensor bias;    // [C]

    std::size_t classes() const { return bias.dim(0); }
    std::vector<encoders::NamedTensor> named_parameters() const;
    std::vector<Tensor> parameters() const;
};

ClassificationHead init_classification_head(std::uint64_t seed, std::size_t dim, std::size_t classes);

/// [N x C] logits of the head.
Tensor classification_logits(const EmbeddingBatch& images, const ClassificationHead& head);

/// Mean softmax cross-entropy of the head logits against class_indices.
Tensor classification_loss(const EmbeddingBatch& images, std::span<const std::size_t> class_indices,
                           const ClassificationHead& head);

inline constexpr double kDefaultMargin = 0.5;

/// Mean over all (anchor, positive, negative) triplets in the batch of
/// max(0, margin - (s(a, p) - s(a, n))), s being the cosine of unit rows.
/// Throws ArgumentError when the batch holds no such triplet.
Tensor image_contrastive_loss(const EmbeddingBatch& images,
                              std::span<const std::size_t> class_indices,
                              double margin = kDefaultMargin);

}  // namespace lasted::baselines
