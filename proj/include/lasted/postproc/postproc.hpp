#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lasted/image.hpp"

namespace lasted::postproc {

/// Standard JPEG luminance quantization table, row-major.
extern const std::array<int, 64> kLuminanceTable;

/// Quality-scaled table: entries max(1, round(t * scale / 100)).
std::array<int, 64> quantization_table(int quality);

/// Blockwise 8x8 DCT quantization round trip per channel. Extents that are
/// not multiples of 8 are reflect-padded for the transform and cropped back.
Image jpeg_like(const Image& image, int quality);

/// Normalized 1-D kernel of radius ceil(3 sigma); {1} for sigma == 0.
std::vector<double> gaussian_kernel(double sigma);
Image gaussian_blur(const Image& image, double sigma);

/// The additive field used by gaussian_noise, before clamping.
std::vector<double> gaussian_noise_field(std::size_t count, double sigma, std::uint64_t seed);
Image gaussian_noise(const Image& image, double sigma, std::uint64_t seed);

/// Box average over factor x factor blocks; factor in {1, 2, 4}.
Image downsample(const Image& image, int factor);

/// Bilinear resampling with pixel-center alignment.
Image resize_bilinear(const Image& image, std::size_t height, std::size_t width);

/// Reflect (mirror without repeating the edge) index into [0, n).
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n);

enum class CorruptionKind { JpegLike, GaussianBlur, GaussianNoise, Downsample };

CorruptionKind parse_corruption_kind(std::string_view name);
std::string corruption_name(CorruptionKind kind);

struct CorruptionSpec {
    CorruptionKind kind = CorruptionKind::JpegLike;
    double severity = 100.0;
    std::uint64_t seed = 0;
};

/// Throws ArgumentError when the severity is outside the kind's range.
void validate(const CorruptionSpec& spec);
/// The severity at which a kind leaves its input unchanged.
double identity_severity(CorruptionKind kind);
Image apply(const Image& image, const CorruptionSpec& spec);

}  // namespace lasted::postproc
