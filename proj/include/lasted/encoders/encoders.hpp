#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lasted/autodiff/tensor.hpp"
#include "lasted/labels/labels.hpp"

namespace lasted::encoders {

using ad::Tensor;

struct EncoderConfig {
    std::size_t input_channels = 3;
    /// Output width of each stride-2 convolution block.
    std::vector<std::size_t> channels{8, 16, 32, 32};
    std::size_t kernel = 3;
    std::size_t stride = 2;
    /// Shared embedding dimension d of both encoders.
    std::size_t embed_dim = 64;
    /// Token embedding width e of the text encoder.
    std::size_t text_dim = 32;
    /// Smallest accepted image height/width.
    std::size_t min_input = 64;
};

using NamedTensor = std::pair<std::string, Tensor>;

struct ConvBlock {
    Tensor weight;  // [out x in x k x k]
    Tensor bias;    // [out]
};

/// Convolutional image encoder: conv blocks with relu, global average pool,
/// linear head, unit normalization.
struct ImageEncoder {
    EncoderConfig config;
    std::vector<ConvBlock> blocks;
    Tensor head_weight;  // [channels.back() x d]
    Tensor head_bias;    // [d]

    std::vector<NamedTensor> named_parameters() const;
    std::vector<Tensor> parameters() const;
};

/// Token embedding table, mean pooling over tokens, linear head, unit
/// normalization.
struct TextEncoder {
    Tensor embedding;    // [vocab x e]
    Tensor head_weight;  // [e x d]
    Tensor head_bias;    // [d]

    std::size_t vocab_size() const { return embedding.dim(0); }
    std::vector<NamedTensor> named_parameters() const;
    std::vector<Tensor> parameters() const;
};

enum class EmbeddingSource { Image, Text };

/// n x d matrix whose rows are unit vectors.
struct EmbeddingBatch {
    Tensor rows;
    EmbeddingSource source = EmbeddingSource::Image;

    std::size_t size() const { return rows.dim(0); }
    std::size_t dim() const { return rows.dim(1); }
    std::span<const double> row(std::size_t i) const {
        return rows.data().subspan(i * dim(), dim());
    }
};

/// images: [b x c x h x w] with values in [0, 1].
EmbeddingBatch encode_image(const Tensor& images, const ImageEncoder& encoder);

EmbeddingBatch encode_tokens(const std::vector<std::vector<int>>& token_ids,
                             const TextEncoder& encoder);
EmbeddingBatch encode_text(std::span<const labels::TextLabel> text,
                           const labels::Vocab& vocab, const TextEncoder& encoder);

/// Fan-in scaled uniform initialization, reproducible from `seed`. The image
/// encoder is drawn from its own stream so it does not depend on the
/// vocabulary size.
std::pair<ImageEncoder, TextEncoder> init_params(std::uint64_t seed, const EncoderConfig& config,
                                                 std::size_t vocab_size);

std::size_t image_parameter_count(const EncoderConfig& config);
std::size_t text_parameter_count(const EncoderConfig& config, std::size_t vocab_size);

}  // namespace lasted::encoders
