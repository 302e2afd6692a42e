#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lasted/autodiff/grad_check.hpp"
#include "lasted/autodiff/ops.hpp"
#include "lasted/baselines/baselines.hpp"
#include "lasted/error.hpp"

using namespace lasted;
using namespace lasted::baselines;
using encoders::EmbeddingSource;

namespace {

EmbeddingBatch unit_batch(std::size_t n, std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<double> v(n * d);
    for (double& x : v) x = g(rng);
    return {ad::l2_normalize(Tensor::from({n, d}, v), 1), EmbeddingSource::Image};
}

}  // namespace

TEST(Paradigm, ParseRoundTrip) {
    for (auto p : {Paradigm::Lasted, Paradigm::Classification, Paradigm::ImageContrastive}) {
        EXPECT_EQ(parse_paradigm(paradigm_name(p)), p);
    }
    EXPECT_THROW(parse_paradigm("moco"), ArgumentError);
}

TEST(ClassificationLoss, UniformLogitsGiveLogC) {
    std::mt19937_64 rng(1);
    auto img = unit_batch(5, 8, rng);
    ClassificationHead head{Tensor::zeros({8, 4}, true), Tensor::zeros({4}, true)};
    std::vector<std::size_t> y{0, 1, 2, 3, 1};
    EXPECT_NEAR(classification_loss(img, y, head).item(), std::log(4.0), 1e-12);
}

TEST(ClassificationLoss, SaturatedLogitsNearZero) {
    EmbeddingBatch img{Tensor::from({2, 2}, {1.0, 0.0, 0.0, 1.0}), EmbeddingSource::Image};
    ClassificationHead head{Tensor::from({2, 2}, {20.0, 0.0, 0.0, 20.0}, true),
                            Tensor::zeros({2}, true)};
    std::vector<std::size_t> y{0, 1};
    EXPECT_LT(classification_loss(img, y, head).item(), 0.01);
}

TEST(ClassificationLoss, IndexOutOfRangeThrows) {
    std::mt19937_64 rng(2);
    auto img = unit_batch(2, 4, rng);
    auto head = init_classification_head(1, 4, 2);
    std::vector<std::size_t> y{0, 2};
    EXPECT_THROW(classification_loss(img, y, head), ArgumentError);
}

TEST(ClassificationLoss, GradCheck) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<double> raw(6 * 5);
    for (double& x : raw) x = g(rng);
    auto head = init_classification_head(4, 5, 4);
    std::vector<Tensor> params{Tensor::from({6, 5}, raw, true), head.weight, head.bias};
    std::vector<std::size_t> y{0, 1, 2, 3, 0, 2};
    auto loss = [&] {
        EmbeddingBatch img{ad::l2_normalize(params[0], 1), EmbeddingSource::Image};
        return classification_loss(img, y, ClassificationHead{params[1], params[2]});
    };
    EXPECT_LT(ad::grad_check(loss, params, {.fd_step = 1e-4}), 1e-3);
}

TEST(ImageContrastiveLoss, SeparatedBatchIsZero) {
    // Two tight clusters on orthogonal axes: s_pos = 1, s_neg = 0.
    EmbeddingBatch img{Tensor::from({4, 2}, {1, 0, 1, 0, 0, 1, 0, 1}), EmbeddingSource::Image};
    std::vector<std::size_t> y{0, 0, 1, 1};
    EXPECT_EQ(image_contrastive_loss(img, y).item(), 0.0);
}

TEST(ImageContrastiveLoss, IdenticalEmbeddingsGiveMargin) {
    std::vector<double> same;
    for (int i = 0; i < 6; ++i) same.insert(same.end(), {0.6, 0.8});
    EmbeddingBatch img{Tensor::from({6, 2}, same), EmbeddingSource::Image};
    std::vector<std::size_t> y{0, 1, 2, 0, 1, 2};
    EXPECT_EQ(image_contrastive_loss(img, y).item(), kDefaultMargin);
    EXPECT_NEAR(image_contrastive_loss(img, y, 0.2).item(), 0.2, 1e-15);
}

TEST(ImageContrastiveLoss, PermutationInvariant) {
    std::mt19937_64 rng(4);
    auto img = unit_batch(8, 5, rng);
    std::vector<std::size_t> y{0, 1, 2, 3, 0, 1, 2, 3};
    std::vector<std::size_t> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> rows;
    std::vector<std::size_t> y2;
    for (auto p : perm) {
        const auto r = img.row(p);
        rows.insert(rows.end(), r.begin(), r.end());
        y2.push_back(y[p]);
    }
    EmbeddingBatch permuted{Tensor::from({8, 5}, rows), EmbeddingSource::Image};
    EXPECT_NEAR(image_contrastive_loss(img, y).item(), image_contrastive_loss(permuted, y2).item(),
                1e-12);
}

TEST(ImageContrastiveLoss, NoTripletThrows) {
    std::mt19937_64 rng(5);
    auto img = unit_batch(3, 4, rng);
    EXPECT_THROW(image_contrastive_loss(img, std::vector<std::size_t>{0, 1, 2}), ArgumentError);
    EXPECT_THROW(image_contrastive_loss(img, std::vector<std::size_t>{0, 0, 0}), ArgumentError);
}

TEST(ImageContrastiveLoss, GradCheck) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    std::vector<double> raw(8 * 5);
    for (double& x : raw) x = g(rng);
    std::vector<Tensor> params{Tensor::from({8, 5}, raw, true)};
    std::vector<std::size_t> y{0, 1, 0, 1, 0, 1, 0, 1};
    auto loss = [&] {
        EmbeddingBatch img{ad::l2_normalize(params[0], 1), EmbeddingSource::Image};
        return image_contrastive_loss(img, y, 1.5);
    };
    EXPECT_GT(loss().item(), 0.0);
    EXPECT_LT(ad::grad_check(loss, params, {.fd_step = 1e-5}), 1e-3);
}
