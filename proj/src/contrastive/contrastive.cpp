#include "lasted/contrastive/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lasted/autodiff/ops.hpp"
#include "lasted/error.hpp"

namespace lasted::contrastive {

namespace {

void validate(const EmbeddingBatch& images, std::span<const std::size_t> label_of_image,
              const EmbeddingBatch& label_embeddings) {
    if (images.dim() != label_embeddings.dim()) {
        throw ShapeError("contrastive loss: image dim " + std::to_string(images.dim()) +
                         " differs from text dim " + std::to_string(label_embeddings.dim()));
    }
    if (label_of_image.size() != images.size()) {
        throw ShapeError("contrastive loss: " + std::to_string(label_of_image.size()) +
                         " label indices for " + std::to_string(images.size()) + " images");
    }
    for (std::size_t i = 0; i < label_of_image.size(); ++i) {
        if (label_of_image[i] >= label_embeddings.size()) {
            throw ArgumentError("contrastive loss: image " + std::to_string(i) +
                                " has label index " + std::to_string(label_of_image[i]) +
                                " outside [0, " + std::to_string(label_embeddings.size()) + ")");
        }
    }
}

// [N x C] similarity logits scaled by 1/tau.
Tensor scaled_logits(const EmbeddingBatch& images, const EmbeddingBatch& label_embeddings,
                     const Temperature& temperature) {
    return ad::mul_scalar(ad::matmul(images.rows, ad::transpose(label_embeddings.rows)),
                          ad::exp(temperature.log_inverse));
}

}  // namespace

Temperature Temperature::from_inverse(double inverse_temperature) {
    if (!(inverse_temperature > 0.0)) {
        throw ArgumentError("inverse temperature must be positive");
    }
    return {Tensor::scalar(std::log(inverse_temperature), true)};
}

double Temperature::inverse() const { return std::exp(log_inverse.item()); }

void clamp_temperature(Temperature& temperature) {
    static const double lo = std::log(kMinInverseTemperature);
    static const double hi = std::log(kMaxInverseTemperature);
    double& s = temperature.log_inverse.mutable_data()[0];
    s = std::clamp(s, lo, hi);
}

Tensor image_axis_loss(const EmbeddingBatch& images, std::span<const std::size_t> label_of_image,
                       const EmbeddingBatch& label_embeddings, const Temperature& temperature) {
    validate(images, label_of_image, label_embeddings);
    const std::size_t classes = label_embeddings.size();
    Tensor logits = scaled_logits(images, label_embeddings, temperature);
    std::vector<std::size_t> matched(images.size());
    for (std::size_t i = 0; i < matched.size(); ++i) {
        matched[i] = i * classes + label_of_image[i];
    }
    return ad::mean(ad::sub(ad::log_sum_exp(logits, 1), ad::gather(logits, matched)));
}

Tensor text_axis_loss(const EmbeddingBatch& images, std::span<const std::size_t> label_of_image,
                      const EmbeddingBatch& label_embeddings, const Temperature& temperature) {
    validate(images, label_of_image, label_embeddings);
    const std::size_t n = images.size();
    const std::size_t classes = label_embeddings.size();
    std::vector<unsigned char> positives(classes * n, 0);
    std::vector<std::size_t> carriers(classes, 0);
    for (std::size_t k = 0; k < n; ++k) {
        positives[label_of_image[k] * n + k] = 1;
        ++carriers[label_of_image[k]];
    }
    for (std::size_t j = 0; j < classes; ++j) {
        if (carriers[j] == 0) {
            throw ArgumentError("text_axis_loss: label " + std::to_string(j) +
                                " has no matching image in the batch");
        }
    }
    // [C x N]: row j holds T_j . I_i / tau for every image i.
    Tensor logits = ad::transpose(scaled_logits(images, label_embeddings, temperature));
    return ad::mean(
        ad::sub(ad::log_sum_exp(logits, 1), ad::log_sum_exp_masked(logits, 1, positives)));
}

LossValue total_loss(const EmbeddingBatch& images, std::span<const std::size_t> label_of_image,
                     const EmbeddingBatch& label_embeddings, const Temperature& temperature) {
    Tensor image_axis = image_axis_loss(images, label_of_image, label_embeddings, temperature);
    Tensor text_axis = text_axis_loss(images, label_of_image, label_embeddings, temperature);
    Tensor total = ad::add(image_axis, text_axis);
    return {total, image_axis, text_axis};
}

}  // namespace lasted::contrastive
