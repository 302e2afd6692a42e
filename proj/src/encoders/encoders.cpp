#include "lasted/encoders/encoders.hpp"

#include <cmath>

#include "lasted/autodiff/ops.hpp"
#include "lasted/error.hpp"
#include "lasted/random.hpp"

namespace lasted::encoders {

namespace {

Tensor uniform_tensor(ad::Shape shape, double bound, Rng& rng) {
    std::vector<double> values(ad::shape_numel(shape));
    for (auto& v : values) {
        v = rng.uniform(-bound, bound);
    }
    return Tensor::from(std::move(shape), std::move(values), true);
}

std::vector<Tensor> values_of(const std::vector<NamedTensor>& named) {
    std::vector<Tensor> out;
    out.reserve(named.size());
    for (const auto& [name, t] : named) {
        out.push_back(t);
    }
    return out;
}

}  // namespace

std::vector<NamedTensor> ImageEncoder::named_parameters() const {
    std::vector<NamedTensor> out;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::string prefix = "image.conv" + std::to_string(i);
        out.emplace_back(prefix + ".weight", blocks[i].weight);
        out.emplace_back(prefix + ".bias", blocks[i].bias);
    }
    out.emplace_back("image.head.weight", head_weight);
    out.emplace_back("image.head.bias", head_bias);
    return out;
}

std::vector<Tensor> ImageEncoder::parameters() const { return values_of(named_parameters()); }

std::vector<NamedTensor> TextEncoder::named_parameters() const {
    return {{"text.embedding", embedding},
            {"text.head.weight", head_weight},
            {"text.head.bias", head_bias}};
}

std::vector<Tensor> TextEncoder::parameters() const { return values_of(named_parameters()); }

EmbeddingBatch encode_image(const Tensor& images, const ImageEncoder& encoder) {
    const auto& cfg = encoder.config;
    if (images.rank() != 4 || images.dim(1) != cfg.input_channels) {
        throw ShapeError("encode_image: expected [b x " + std::to_string(cfg.input_channels) +
                         " x h x w], got " + ad::shape_str(images.shape()));
    }
    if (images.dim(2) < cfg.min_input || images.dim(3) < cfg.min_input) {
        throw ShapeError("encode_image: input " + std::to_string(images.dim(2)) + "x" +
                         std::to_string(images.dim(3)) + " is below the minimum " +
                         std::to_string(cfg.min_input));
    }
    Tensor h = ad::add_constant(images, -0.5);
    for (const auto& block : encoder.blocks) {
        h = ad::relu(ad::add_channel_bias(ad::conv2d(h, block.weight, cfg.stride), block.bias));
    }
    Tensor features = ad::global_avg_pool(h);
    Tensor projected =
        ad::add_row_vector(ad::matmul(features, encoder.head_weight), encoder.head_bias);
    return {ad::l2_normalize(projected, 1), EmbeddingSource::Image};
}

EmbeddingBatch encode_tokens(const std::vector<std::vector<int>>& token_ids,
                             const TextEncoder& encoder) {
    if (token_ids.empty()) {
        throw ArgumentError("encode_text: no labels");
    }
    const std::size_t vocab = encoder.vocab_size();
    // Mean pooling as a constant [labels x vocab] averaging matrix.
    std::vector<double> pool(token_ids.size() * vocab, 0.0);
    for (std::size_t i = 0; i < token_ids.size(); ++i) {
        if (token_ids[i].empty()) {
            throw ArgumentError("encode_text: label " + std::to_string(i) + " has no tokens");
        }
        const double w = 1.0 / static_cast<double>(token_ids[i].size());
        for (int id : token_ids[i]) {
            if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
                throw ArgumentError("encode_text: token id " + std::to_string(id) +
                                    " outside vocabulary of " + std::to_string(vocab));
            }
            pool[i * vocab + static_cast<std::size_t>(id)] += w;
        }
    }
    Tensor pooled =
        ad::matmul(Tensor::from({token_ids.size(), vocab}, std::move(pool)), encoder.embedding);
    Tensor projected =
        ad::add_row_vector(ad::matmul(pooled, encoder.head_weight), encoder.head_bias);
    return {ad::l2_normalize(projected, 1), EmbeddingSource::Text};
}

EmbeddingBatch encode_text(std::span<const labels::TextLabel> text, const labels::Vocab& vocab,
                           const TextEncoder& encoder) {
    std::vector<std::vector<int>> ids;
    ids.reserve(text.size());
    for (const auto& label : text) {
        ids.push_back(labels::tokenize(label, vocab));
    }
    return encode_tokens(ids, encoder);
}

std::pair<ImageEncoder, TextEncoder> init_params(std::uint64_t seed, const EncoderConfig& config,
                                                 std::size_t vocab_size) {
    if (config.channels.empty() || config.embed_dim == 0 || config.text_dim == 0 ||
        vocab_size == 0) {
        throw ArgumentError("init_params: empty encoder dimensions");
    }
    ImageEncoder image;
    image.config = config;
    Rng image_rng(derive_seed(seed, {0x1a6e}));
    std::size_t in = config.input_channels;
    for (std::size_t out : config.channels) {
        const double fan_in = static_cast<double>(in * config.kernel * config.kernel);
        ConvBlock block;
        block.weight = uniform_tensor({out, in, config.kernel, config.kernel},
                                      std::sqrt(6.0 / fan_in), image_rng);
        block.bias = uniform_tensor({out}, 1.0 / std::sqrt(fan_in), image_rng);
        image.blocks.push_back(std::move(block));
        in = out;
    }
    const double head_fan_in = static_cast<double>(in);
    image.head_weight =
        uniform_tensor({in, config.embed_dim}, std::sqrt(3.0 / head_fan_in), image_rng);
    image.head_bias = uniform_tensor({config.embed_dim}, 1.0 / std::sqrt(head_fan_in), image_rng);

    TextEncoder text;
    Rng text_rng(derive_seed(seed, {0x7e47}));
    text.embedding = uniform_tensor({vocab_size, config.text_dim}, 1.0, text_rng);
    const double text_fan_in = static_cast<double>(config.text_dim);
    text.head_weight =
        uniform_tensor({config.text_dim, config.embed_dim}, std::sqrt(3.0 / text_fan_in), text_rng);
    text.head_bias = uniform_tensor({config.embed_dim}, 1.0 / std::sqrt(text_fan_in), text_rng);
    return {std::move(image), std::move(text)};
}

std::size_t image_parameter_count(const EncoderConfig& config) {
    std::size_t total = 0;
    std::size_t in = config.input_channels;
    for (std::size_t out : config.channels) {
        total += out * in * config.kernel * config.kernel + out;
        in = out;
    }
    return total + in * config.embed_dim + config.embed_dim;
}

std::size_t text_parameter_count(const EncoderConfig& config, std::size_t vocab_size) {
    return vocab_size * config.text_dim + config.text_dim * config.embed_dim + config.embed_dim;
}

}  // namespace lasted::encoders
