#include <gtest/gtest.h>

#include <cmath>

#include "lasted/autodiff/grad_check.hpp"
#include "lasted/autodiff/ops.hpp"
#include "lasted/encoders/encoders.hpp"
#include "lasted/error.hpp"
#include "lasted/labels/labels.hpp"
#include "lasted/random.hpp"

using namespace lasted;
using namespace lasted::encoders;

namespace {

Tensor random_images(std::size_t b, std::size_t size, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(b * 3 * size * size);
    for (auto& e : v) e = rng.uniform();
    return Tensor::from({b, 3, size, size}, std::move(v));
}

void expect_unit_rows(const EmbeddingBatch& e) {
    for (std::size_t r = 0; r < e.size(); ++r) {
        double sq = 0.0;
        for (double v : e.row(r)) sq += v * v;
        EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-9);
    }
}

}  // namespace

TEST(EncodeImage, BatchShapeAndUnitRows) {
    auto [img, txt] = init_params(1, {}, 4);
    auto e = encode_image(random_images(2, 64, 9), img);
    EXPECT_EQ(e.size(), 2u);
    EXPECT_EQ(e.dim(), 64u);
    EXPECT_EQ(e.source, EmbeddingSource::Image);
    expect_unit_rows(e);
}

TEST(EncodeImage, AllZeroImageGivesFiniteUnitVector) {
    auto [img, txt] = init_params(1, {}, 4);
    auto e = encode_image(Tensor::zeros({1, 3, 64, 64}), img);
    for (double v : e.row(0)) EXPECT_TRUE(std::isfinite(v));
    expect_unit_rows(e);
}

TEST(EncodeImage, IdenticalImagesGiveIdenticalRows) {
    auto [img, txt] = init_params(3, {}, 4);
    auto one = random_images(1, 64, 5);
    std::vector<double> twice(one.data().begin(), one.data().end());
    twice.insert(twice.end(), one.data().begin(), one.data().end());
    auto e = encode_image(Tensor::from({2, 3, 64, 64}, twice), img);
    for (std::size_t i = 0; i < e.dim(); ++i) EXPECT_EQ(e.row(0)[i], e.row(1)[i]);
}

TEST(EncodeImage, UndersizedInputThrows) {
    auto [img, txt] = init_params(1, {}, 4);
    EXPECT_THROW(encode_image(Tensor::zeros({1, 3, 32, 64}), img), ShapeError);
    EXPECT_THROW(encode_image(Tensor::zeros({1, 1, 64, 64}), img), ShapeError);
}

TEST(EncodeText, DuplicateLabelsGiveIdenticalRows) {
    labels::LabelSet set(labels::LabelStrategy::R2);
    auto [img, txt] = init_params(1, {}, set.vocab().size());
    std::vector<labels::TextLabel> two{set[0], set[0]};
    auto e = encode_text(two, set.vocab(), txt);
    EXPECT_EQ(e.source, EmbeddingSource::Text);
    for (std::size_t i = 0; i < e.dim(); ++i) EXPECT_EQ(e.row(0)[i], e.row(1)[i]);
}

TEST(EncodeText, FourLabelsGiveFourRowsThatDiffer) {
    labels::LabelSet set(labels::LabelStrategy::R2);
    auto [img, txt] = init_params(11, {}, set.vocab().size());
    auto e = encode_text(set.labels(), set.vocab(), txt);
    EXPECT_EQ(e.size(), 4u);
    EXPECT_EQ(e.dim(), img.config.embed_dim);
    expect_unit_rows(e);
    double diff = 0.0;
    for (std::size_t i = 0; i < e.dim(); ++i) diff += std::abs(e.row(0)[i] - e.row(3)[i]);
    EXPECT_GT(diff, 1e-3);
}

TEST(EncodeText, UnknownTokenThrows) {
    labels::LabelSet set(labels::LabelStrategy::R2);
    auto [img, txt] = init_params(1, {}, set.vocab().size());
    std::vector<labels::TextLabel> bad{{"Real Sketch", labels::Authenticity::Real, {}}};
    EXPECT_THROW(encode_text(bad, set.vocab(), txt), ArgumentError);
    EXPECT_THROW(encode_tokens({{7}}, txt), ArgumentError);
}

TEST(InitParams, SameSeedIsBitIdenticalOtherSeedDiffers) {
    auto a = init_params(42, {}, 4);
    auto b = init_params(42, {}, 4);
    auto c = init_params(43, {}, 4);
    auto pa = a.first.parameters();
    auto pb = b.first.parameters();
    auto pc = c.first.parameters();
    bool any_diff = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        for (std::size_t k = 0; k < pa[i].numel(); ++k) {
            EXPECT_EQ(pa[i][k], pb[i][k]);
            any_diff = any_diff || pa[i][k] != pc[i][k];
        }
    }
    EXPECT_TRUE(any_diff);
    EXPECT_EQ(a.second.embedding[0], b.second.embedding[0]);
    EXPECT_NE(a.second.embedding[0], c.second.embedding[0]);
}

TEST(InitParams, ImageEncoderIndependentOfVocabulary) {
    auto a = init_params(5, {}, 2);
    auto b = init_params(5, {}, 4);
    auto pa = a.first.parameters();
    auto pb = b.first.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        for (std::size_t k = 0; k < pa[i].numel(); ++k) EXPECT_EQ(pa[i][k], pb[i][k]);
    }
}

TEST(InitParams, ParameterCountMatchesLayerFormula) {
    EncoderConfig cfg;
    // 3->8, 8->16, 16->32, 32->32 with 3x3 kernels, then 32->64 head.
    const std::size_t expected = (8 * 3 * 9 + 8) + (16 * 8 * 9 + 16) + (32 * 16 * 9 + 32) +
                                 (32 * 32 * 9 + 32) + (32 * 64 + 64);
    EXPECT_EQ(image_parameter_count(cfg), expected);
    auto [img, txt] = init_params(0, cfg, 4);
    std::size_t counted = 0;
    for (const auto& p : img.parameters()) counted += p.numel();
    EXPECT_EQ(counted, expected);
    std::size_t text_counted = 0;
    for (const auto& p : txt.parameters()) text_counted += p.numel();
    EXPECT_EQ(text_counted, text_parameter_count(cfg, 4));
    EXPECT_EQ(text_counted, 4u * 32 + 32 * 64 + 64);
}

TEST(EncodeImage, GradientReachesEveryParameter) {
    auto [img, txt] = init_params(2, {}, 4);
    auto images = random_images(2, 64, 17);
    Rng rng(99);
    std::vector<double> probe(2 * 64);
    for (auto& v : probe) v = rng.uniform(-1, 1);
    auto probe_t = Tensor::from({2, 64}, probe);
    auto params = img.parameters();
    auto loss = [&] { return ad::dot(encode_image(images, img).rows, probe_t); };

    for (auto& p : params) p.zero_grad();
    loss().backward();
    for (const auto& [name, p] : img.named_parameters()) {
        double mag = 0.0;
        for (double g : p.grad()) mag += std::abs(g);
        EXPECT_GT(mag, 0.0) << name;
    }
    // A 64x64 input has thousands of relu units per channel; a 1e-3 step
    // moves some of them across the kink, so probe with a finer step.
    const double err = ad::grad_check(loss, params, {.fd_step = 1e-5, .max_entries_per_param = 12});
    EXPECT_LT(err, 1e-3);
}

TEST(EncodeText, GradientMatchesFiniteDifferences) {
    labels::LabelSet set(labels::LabelStrategy::R2);
    auto [img, txt] = init_params(4, {}, set.vocab().size());
    auto params = txt.parameters();
    Rng rng(3);
    std::vector<double> probe(4 * 64);
    for (auto& v : probe) v = rng.uniform(-1, 1);
    auto probe_t = Tensor::from({4, 64}, probe);
    auto loss = [&] { return ad::dot(encode_text(set.labels(), set.vocab(), txt).rows, probe_t); };
    EXPECT_LT(ad::grad_check(loss, params, {.fd_step = 1e-3, .max_entries_per_param = 40}), 1e-3);
}
