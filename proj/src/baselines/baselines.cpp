#include "lasted/baselines/baselines.hpp"

#include <cmath>

#include "lasted/autodiff/ops.hpp"
#include "lasted/error.hpp"
#include "lasted/random.hpp"

namespace lasted::baselines {

Paradigm parse_paradigm(std::string_view name) {
    if (name == "lasted") return Paradigm::Lasted;
    if (name == "classification") return Paradigm::Classification;
    if (name == "image_contrastive") return Paradigm::ImageContrastive;
    throw ArgumentError("unknown paradigm '" + std::string(name) + "'");
}

std::string paradigm_name(Paradigm paradigm) {
    switch (paradigm) {
        case Paradigm::Lasted: return "lasted";
        case Paradigm::Classification: return "classification";
        case Paradigm::ImageContrastive: return "image_contrastive";
    }
    return "?";
}

std::vector<encoders::NamedTensor> ClassificationHead::named_parameters() const {
    return {{"cls.head.weight", weight}, {"cls.head.bias", bias}};
}

std::vector<Tensor> ClassificationHead::parameters() const { return {weight, bias}; }

ClassificationHead init_classification_head(std::uint64_t seed, std::size_t dim, std::size_t classes) {
    if (dim == 0 || classes == 0) throw ArgumentError("classification head needs d, C >= 1");
    Rng rng(derive_seed(seed, {0xc1a55}));
    const double limit = std::sqrt(3.0 / static_cast<double>(dim));
    std::vector<double> w(dim * classes);
    for (double& v : w) v = rng.uniform(-limit, limit);
    return {Tensor::from({dim, classes}, std::move(w), true),
            Tensor::from({classes}, std::vector<double>(classes, 0.0), true)};
}

Tensor classification_logits(const EmbeddingBatch& images, const ClassificationHead& head) {
    if (images.dim() != head.weight.dim(0)) {
        throw ShapeError("classification head expects d=" + std::to_string(head.weight.dim(0)) +
                         ", got " + std::to_string(images.dim()));
    }
    return ad::add_row_vector(ad::matmul(images.rows, head.weight), head.bias);
}

Tensor classification_loss(const EmbeddingBatch& images, std::span<const std::size_t> class_indices,
                           const ClassificationHead& head) {
    const std::size_t n = images.size();
    const std::size_t c = head.classes();
    if (class_indices.size() != n) {
        throw ArgumentError("classification_loss: " + std::to_string(class_indices.size()) +
                            " indices for " + std::to_string(n) + " images");
    }
    std::vector<std::size_t> picks(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (class_indices[i] >= c) {
            throw ArgumentError("class index " + std::to_string(class_indices[i]) +
                                " out of range for " + std::to_string(c) + " classes");
        }
        picks[i] = i * c + class_indices[i];
    }
    const Tensor logits = classification_logits(images, head);
    return ad::mean(ad::sub(ad::log_sum_exp(logits, 1), ad::gather(logits, picks)));
}

Tensor image_contrastive_loss(const EmbeddingBatch& images,
                              std::span<const std::size_t> class_indices, double margin) {
    const std::size_t n = images.size();
    if (class_indices.size() != n) {
        throw ArgumentError("image_contrastive_loss: " + std::to_string(class_indices.size()) +
                            " indices for " + std::to_string(n) + " images");
    }
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t p = 0; p < n; ++p) {
            if (p == a || class_indices[p] != class_indices[a]) continue;
            for (std::size_t q = 0; q < n; ++q) {
                if (class_indices[q] == class_indices[a]) continue;
                pos.push_back(a * n + p);
                neg.push_back(a * n + q);
            }
        }
    if (pos.empty()) {
        throw ArgumentError("batch has no (anchor, positive, negative) triplet");
    }
    const Tensor sims = ad::matmul(images.rows, ad::transpose(images.rows));
    const Tensor gap = ad::sub(ad::gather(sims, neg), ad::gather(sims, pos));
    return ad::mean(ad::relu(ad::add_constant(gap, margin)));
}

}  // namespace lasted::baselines
