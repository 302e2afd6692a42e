#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <random>
#include <set>

#include "lasted/error.hpp"
#include "lasted/identify/identify.hpp"

using namespace lasted;
using namespace lasted::identify;

namespace {

Vector unit(std::size_t d, std::size_t k) {
    Vector v(d, 0.0);
    v[k] = 1.0;
    return v;
}

Vector random_unit(std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vector v(d);
    double sq = 0.0;
    for (double& x : v) {
        x = g(rng);
        sq += x * x;
    }
    for (double& x : v) x /= std::sqrt(sq);
    return v;
}

}  // namespace

TEST(BuildAnchor, MeanOfMembers) {
    std::mt19937_64 rng(1);
    const auto u = random_unit(5, rng);
    const std::vector<Vector> same(4, u);
    const auto a = build_anchor(same, "real photo");
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(a.representation[k], u[k], 1e-15);
    EXPECT_EQ(a.size, 4u);
    EXPECT_EQ(build_anchor(std::vector<Vector>{u}, "x").representation, u);
    const std::vector<Vector> ortho{unit(4, 0), unit(4, 1)};
    EXPECT_EQ(build_anchor(ortho, "x").representation, (Vector{0.5, 0.5, 0.0, 0.0}));
    EXPECT_THROW(build_anchor(std::vector<Vector>{}, "x"), ArgumentError);
}

TEST(BuildAnchor, MemberOrderIrrelevant) {
    std::mt19937_64 rng(2);
    std::vector<Vector> members;
    for (int i = 0; i < 6; ++i) members.push_back(random_unit(8, rng));
    const auto a = build_anchor(members, "x");
    for (int trial = 0; trial < 20; ++trial) {
        std::shuffle(members.begin(), members.end(), rng);
        EXPECT_EQ(build_anchor(members, "x").representation, a.representation);
    }
}

TEST(Similarity, GeometryExamples) {
    std::mt19937_64 rng(3);
    const auto u = random_unit(6, rng);
    Vector minus_u(u);
    for (double& x : minus_u) x = -x;
    const auto anchor_u = build_anchor(std::vector<Vector>{u}, "u");
    EXPECT_NEAR(similarity(u, anchor_u), 1.0, 1e-12);
    EXPECT_NEAR(similarity(minus_u, anchor_u), -1.0, 1e-12);
    const auto both = build_anchor(std::vector<Vector>{unit(3, 0), unit(3, 1)}, "e");
    EXPECT_NEAR(similarity(unit(3, 0), both), std::sqrt(0.5), 1e-12);
}

TEST(Similarity, ScaleInvariantAndBounded) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
        const auto q = random_unit(16, rng);
        const auto anchor = build_anchor(std::vector<Vector>{random_unit(16, rng), random_unit(16, rng)}, "a");
        Vector scaled(q);
        for (double& x : scaled) x *= 7.25;
        const double s = similarity(q, anchor);
        EXPECT_NEAR(similarity(scaled, anchor), s, 1e-12);
        EXPECT_LE(std::abs(s), 1.0 + 1e-9);
    }
}

TEST(Similarity, ZeroNormThrows) {
    const auto anchor = build_anchor(std::vector<Vector>{unit(3, 0)}, "a");
    EXPECT_THROW(similarity(Vector(3, 0.0), anchor), ArgumentError);
    EXPECT_THROW(same_category_score(unit(3, 0), Vector(3, 0.0)), ArgumentError);
    EXPECT_THROW(same_category_score(unit(3, 0), unit(4, 0)), ShapeError);
}

TEST(SameCategoryScore, Examples) {
    std::mt19937_64 rng(5);
    const auto u = random_unit(5, rng);
    Vector triple(u);
    for (double& x : triple) x *= 3.0;
    EXPECT_NEAR(same_category_score(u, u), 1.0, 1e-12);
    EXPECT_EQ(same_category_score(unit(3, 0), unit(3, 1)), 0.0);
    EXPECT_NEAR(same_category_score(u, triple), 1.0, 1e-12);
}

TEST(Classify, MedianSplitsUpperHalf) {
    const std::vector<double> scores{0.9, 0.8, 0.2, 0.1};
    const double th = resolve_threshold(scores, DecisionThreshold::median());
    EXPECT_GT(th, 0.2);
    EXPECT_LE(th, 0.8);
    const auto d = classify(scores, DecisionThreshold::median());
    EXPECT_EQ(d, (std::vector<Decision>{Decision::SameCategory, Decision::SameCategory,
                                        Decision::DifferentCategory, Decision::DifferentCategory}));
}

TEST(Classify, FixedBoundaryAndTies) {
    EXPECT_EQ(classify(std::vector<double>{0.5}, DecisionThreshold::fixed(0.5))[0],
              Decision::SameCategory);
    for (auto d : classify(std::vector<double>(6, 0.3), DecisionThreshold::median())) {
        EXPECT_EQ(d, Decision::SameCategory);
    }
    EXPECT_THROW(DecisionThreshold::fixed(1.5), ArgumentError);
}

TEST(Classify, EvenCountMedianLabelsUpperHalf) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> scores(2 * (1 + t % 10));
        for (double& s : scores) s = u(rng);
        const auto d = classify(scores, DecisionThreshold::median());
        EXPECT_EQ(std::count(d.begin(), d.end(), Decision::SameCategory),
                  static_cast<std::ptrdiff_t>(scores.size() / 2));
    }
}

TEST(Threshold, ParseForms) {
    EXPECT_EQ(DecisionThreshold::parse("median").mode, DecisionThreshold::Mode::Median);
    const auto f = DecisionThreshold::parse("fixed:0.25");
    EXPECT_EQ(f.mode, DecisionThreshold::Mode::Fixed);
    EXPECT_EQ(f.value, 0.25);
    EXPECT_THROW(DecisionThreshold::parse("fixed:"), ArgumentError);
    EXPECT_THROW(DecisionThreshold::parse("mean"), ArgumentError);
    EXPECT_THROW(DecisionThreshold::parse("fixed:2"), ArgumentError);
}

TEST(PredictLabelText, ArgmaxWithLowestIndexTies) {
    const std::vector<Vector> rows{unit(3, 0), unit(3, 1), unit(3, 2)};
    EXPECT_EQ(predict_label_text(unit(3, 2), rows), 2u);
    EXPECT_EQ(predict_label_text(Vector{0.3, -0.2, 0.9}, std::vector<Vector>{unit(3, 1)}), 0u);
    EXPECT_EQ(predict_label_text(Vector{1.0, 1.0, 0.0}, rows), 0u);
}

TEST(PredictLabelText, InvariantUnderPositiveRescaling) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 50; ++t) {
        std::vector<Vector> rows;
        for (int j = 0; j < 4; ++j) rows.push_back(random_unit(8, rng));
        const auto q = random_unit(8, rng);
        const auto base = predict_label_text(q, rows);
        Vector q2(q);
        for (double& x : q2) x *= 0.01;
        auto rows2 = rows;
        for (auto& r : rows2)
            for (double& x : r) x *= 40.0;
        EXPECT_EQ(predict_label_text(q2, rows), base);
        EXPECT_EQ(predict_label_text(q, rows2), base);
    }
}

TEST(SampleAnchorIndices, DistinctSeededSubset) {
    const auto a = sample_anchor_indices(50, 10, 3);
    const auto b = sample_anchor_indices(50, 10, 3);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, sample_anchor_indices(50, 10, 4));
    std::set<std::size_t> s(a.begin(), a.end());
    EXPECT_EQ(s.size(), 10u);
    EXPECT_LT(*s.rbegin(), 50u);
    EXPECT_THROW(sample_anchor_indices(5, 6, 1), ArgumentError);
    EXPECT_THROW(sample_anchor_indices(5, 0, 1), ArgumentError);
}
