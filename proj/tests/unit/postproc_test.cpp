#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "../support/spectral.hpp"
#include "lasted/data/data.hpp"
#include "lasted/error.hpp"
#include "lasted/postproc/postproc.hpp"
#include "lasted/random.hpp"

using namespace lasted;
using namespace lasted::postproc;

namespace {

Image random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
    Rng rng(seed);
    Image img(3, h, w);
    for (float& v : img.pixels) v = static_cast<float>(rng.uniform());
    quantize_8bit(img);
    return img;
}

double max_abs_diff(const Image& a, const Image& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a.pixels[i]) - b.pixels[i]));
    return m;
}

void expect_unit_range(const Image& img) {
    for (float v : img.pixels) {
        ASSERT_GE(v, 0.0f);
        ASSERT_LE(v, 1.0f);
    }
}

// Textbook 8x8 DCT quantization written from the cosine-sum definition.
Image reference_jpeg(const Image& img, int quality) {
    const double scale = quality < 50 ? 5000.0 / quality : 200.0 - 2.0 * quality;
    Image out(img.channels, img.height, img.width);
    auto alpha = [](int k) { return k == 0 ? std::sqrt(0.125L) : std::sqrt(0.25L); };
    for (std::size_t c = 0; c < img.channels; ++c)
        for (std::size_t by = 0; by < img.height; by += 8)
            for (std::size_t bx = 0; bx < img.width; bx += 8) {
                long double q[8][8];
                for (int v = 0; v < 8; ++v)
                    for (int u = 0; u < 8; ++u) {
                        long double s = 0;
                        for (int y = 0; y < 8; ++y)
                            for (int x = 0; x < 8; ++x)
                                s += (255.0L * img.at(c, by + y, bx + x) - 128.0L) *
                                     std::cos((2 * y + 1) * v * std::numbers::pi_v<long double> / 16) *
                                     std::cos((2 * x + 1) * u * std::numbers::pi_v<long double> / 16);
                        s *= alpha(v) * alpha(u);
                        const long double t = std::max(
                            1.0L, std::round(kLuminanceTable[v * 8 + u] * scale / 100.0L));
                        q[v][u] = std::round(s / t) * t;
                    }
                for (int y = 0; y < 8; ++y)
                    for (int x = 0; x < 8; ++x) {
                        long double s = 0;
                        for (int v = 0; v < 8; ++v)
                            for (int u = 0; u < 8; ++u)
                                s += alpha(v) * alpha(u) * q[v][u] *
                                     std::cos((2 * y + 1) * v * std::numbers::pi_v<long double> / 16) *
                                     std::cos((2 * x + 1) * u * std::numbers::pi_v<long double> / 16);
                        out.at(c, by + y, bx + x) =
                            static_cast<float>(std::clamp((s + 128.0L) / 255.0L, 0.0L, 1.0L));
                    }
            }
    return out;
}

Image checker2_image(std::uint64_t seed) {
    return data::generate_toy_sample(data::Category::SyntheticPhoto, "checker2", seed, 64).pixels;
}

}  // namespace

TEST(QuantizationTable, QualityScalingRule) {
    const auto q50 = quantization_table(50);
    EXPECT_TRUE(std::equal(q50.begin(), q50.end(), kLuminanceTable.begin()));
    const auto q100 = quantization_table(100);
    EXPECT_TRUE(std::all_of(q100.begin(), q100.end(), [](int t) { return t == 1; }));
    const auto q10 = quantization_table(10);
    EXPECT_EQ(q10[0], 80);
    EXPECT_EQ(quantization_table(90)[0], 3);  // round(16 * 20 / 100)
    EXPECT_THROW(quantization_table(9), ArgumentError);
    EXPECT_THROW(quantization_table(101), ArgumentError);
}

TEST(JpegLike, UnitTableRoundTripWithinTwoLevels) {
    const auto img = random_image(64, 64, 1);
    const auto out = jpeg_like(img, 100);
    EXPECT_LE(max_abs_diff(img, out), 2.0 / 255.0);
}

TEST(JpegLike, MatchesCosineSumReference) {
    const auto img = random_image(16, 24, 2);
    for (int q : {10, 35, 50, 75, 95}) {
        EXPECT_LE(max_abs_diff(jpeg_like(img, q), reference_jpeg(img, q)), 1e-5) << q;
    }
}

TEST(JpegLike, ConstantImageStaysConstant) {
    for (int q : {10, 30, 50, 70, 100}) {
        const float level = 77.0f / 255.0f;
        Image img(3, 16, 16, level);
        const auto out = jpeg_like(img, q);
        const auto [lo, hi] = std::minmax_element(out.pixels.begin(), out.pixels.end());
        EXPECT_LE(*hi - *lo, 1e-6f) << q;
        // Only the DC term survives: its rounding moves every pixel by at
        // most half a DC step over the 8x DC basis gain.
        const double bound = std::max(1.0, quantization_table(q)[0] / 16.0) / 255.0;
        EXPECT_LE(std::abs(*lo - level), bound + 1e-6) << q;
        if (q >= 50) EXPECT_LE(std::abs(*lo - level), 1.0 / 255.0 + 1e-6) << q;
    }
}

TEST(JpegLike, LowQualityAttenuatesCheckerPeak) {
    const auto img = checker2_image(5);
    EXPECT_LT(oracle::nyquist_magnitude(jpeg_like(img, 10)),
              0.5 * oracle::nyquist_magnitude(jpeg_like(img, 90)));
}

TEST(JpegLike, OddExtentsAreReflectPadded) {
    const auto img = random_image(13, 21, 3);
    const auto out = jpeg_like(img, 60);
    EXPECT_EQ(out.height, 13u);
    EXPECT_EQ(out.width, 21u);
    expect_unit_range(out);
    EXPECT_LE(max_abs_diff(img, jpeg_like(img, 100)), 2.0 / 255.0);
}

TEST(ReflectIndex, MirrorsWithoutRepeatingEdge) {
    EXPECT_EQ(reflect_index(-1, 5), 1u);
    EXPECT_EQ(reflect_index(-2, 5), 2u);
    EXPECT_EQ(reflect_index(5, 5), 3u);
    EXPECT_EQ(reflect_index(9, 5), 1u);
    EXPECT_EQ(reflect_index(3, 1), 0u);
}

TEST(GaussianBlur, ZeroSigmaIsBitIdentical) {
    const auto img = random_image(20, 20, 4);
    EXPECT_EQ(gaussian_blur(img, 0.0), img);
}

TEST(GaussianBlur, ConstantImageUnchanged) {
    Image img(3, 10, 12, 0.4f);
    const auto out = gaussian_blur(img, 2.0);
    for (float v : out.pixels) EXPECT_NEAR(v, 0.4f, 1e-6f);
}

TEST(GaussianBlur, KernelNormalizedWithThreeSigmaRadius) {
    const auto k = gaussian_kernel(1.5);
    EXPECT_EQ(k.size(), 2u * 5 + 1);
    EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-9);
    EXPECT_EQ(k.front(), k.back());
    EXPECT_THROW(gaussian_kernel(-1.0), ArgumentError);
}

TEST(GaussianBlur, AttenuatesCheckerPeak) {
    const auto img = checker2_image(6);
    EXPECT_LT(oracle::nyquist_magnitude(gaussian_blur(img, 1.0)),
              0.1 * oracle::nyquist_magnitude(img));
}

TEST(GaussianNoise, ZeroSigmaIsIdentity) {
    const auto img = random_image(8, 8, 5);
    EXPECT_EQ(gaussian_noise(img, 0.0, 9), img);
}

TEST(GaussianNoise, FieldStandardDeviationWithinOnePercent) {
    for (double sigma : {0.02, 0.1}) {
        const auto field = gaussian_noise_field(1'000'000, sigma, 7);
        long double sum = 0, sq = 0;
        for (double v : field) {
            sum += v;
            sq += static_cast<long double>(v) * v;
        }
        const long double mean = sum / field.size();
        const double sd = static_cast<double>(std::sqrt(sq / field.size() - mean * mean));
        EXPECT_NEAR(sd / sigma, 1.0, 0.01);
    }
}

TEST(GaussianNoise, SeedDeterminesOutput) {
    const auto img = random_image(16, 16, 6);
    EXPECT_EQ(gaussian_noise(img, 0.05, 3), gaussian_noise(img, 0.05, 3));
    EXPECT_NE(gaussian_noise(img, 0.05, 3), gaussian_noise(img, 0.05, 4));
    expect_unit_range(gaussian_noise(img, 0.2, 3));
}

TEST(Downsample, FactorOneIsIdentity) {
    const auto img = random_image(8, 8, 7);
    EXPECT_EQ(downsample(img, 1), img);
}

TEST(Downsample, BoxMean) {
    Image img(1, 2, 2);
    img.pixels = {0.0f, 0.0f, 1.0f, 1.0f};
    const auto out = downsample(img, 2);
    ASSERT_EQ(out.pixels.size(), 1u);
    EXPECT_EQ(out.pixels[0], 0.5f);
    EXPECT_EQ(downsample(random_image(16, 8, 1), 4).height, 4u);
}

TEST(Downsample, RemovesCheckerPeak) {
    double before = 0.0;
    double after = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto img = checker2_image(seed);
        before += oracle::nyquist_ratio(img) / 100.0;
        after += oracle::nyquist_ratio(downsample(img, 2)) / 100.0;
    }
    EXPECT_GT(before, 5.0);
    EXPECT_LT(after, 1.5);
}

TEST(Downsample, RejectsBadFactorOrExtent) {
    EXPECT_THROW(downsample(random_image(8, 8, 1), 3), ArgumentError);
    EXPECT_THROW(downsample(random_image(6, 8, 1), 4), ShapeError);
}

TEST(ResizeBilinear, IdentityAndConstant) {
    const auto img = random_image(10, 10, 8);
    EXPECT_EQ(resize_bilinear(img, 10, 10), img);
    Image flat(3, 7, 9, 0.25f);
    for (float v : resize_bilinear(flat, 13, 4).pixels) EXPECT_NEAR(v, 0.25f, 1e-7f);
}

TEST(Corruption, RangesValidated) {
    EXPECT_THROW(validate({CorruptionKind::JpegLike, 5.0, 0}), ArgumentError);
    EXPECT_THROW(validate({CorruptionKind::GaussianBlur, 5.5, 0}), ArgumentError);
    EXPECT_THROW(validate({CorruptionKind::GaussianNoise, 0.3, 0}), ArgumentError);
    EXPECT_THROW(validate({CorruptionKind::Downsample, 3.0, 0}), ArgumentError);
    EXPECT_NO_THROW(validate({CorruptionKind::GaussianBlur, 5.0, 0}));
    EXPECT_EQ(parse_corruption_kind("gaussian_noise"), CorruptionKind::GaussianNoise);
    EXPECT_THROW(parse_corruption_kind("sharpen"), ArgumentError);
}

TEST(Corruption, IdentitySeverityPreservesInput) {
    const auto img = random_image(16, 16, 9);
    for (auto kind : {CorruptionKind::JpegLike, CorruptionKind::GaussianBlur,
                      CorruptionKind::GaussianNoise, CorruptionKind::Downsample}) {
        const auto out = apply(img, {kind, identity_severity(kind), 1});
        EXPECT_LE(max_abs_diff(img, out), 2.0 / 255.0) << corruption_name(kind);
        if (kind != CorruptionKind::JpegLike) EXPECT_EQ(out, img);
    }
}

TEST(Corruption, ShapeAndRangePreserved) {
    const auto img = random_image(32, 32, 10);
    for (auto spec : {CorruptionSpec{CorruptionKind::JpegLike, 30, 0},
                      CorruptionSpec{CorruptionKind::GaussianBlur, 2.0, 0},
                      CorruptionSpec{CorruptionKind::GaussianNoise, 0.1, 5}}) {
        const auto out = apply(img, spec);
        EXPECT_EQ(out.height, 32u);
        EXPECT_EQ(out.width, 32u);
        expect_unit_range(out);
    }
    const auto small = apply(img, {CorruptionKind::Downsample, 4, 0});
    EXPECT_EQ(small.height, 8u);
    EXPECT_EQ(small.width, 8u);
}
