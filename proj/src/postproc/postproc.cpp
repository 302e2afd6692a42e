#include "lasted/postproc/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lasted/error.hpp"
#include "lasted/random.hpp"

namespace lasted::postproc {

const std::array<int, 64> kLuminanceTable{
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99};

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
    if (n == 1) return 0;
    const auto period = static_cast<std::ptrdiff_t>(2 * n - 2);
    i %= period;
    if (i < 0) i += period;
    if (i >= static_cast<std::ptrdiff_t>(n)) i = period - i;
    return static_cast<std::size_t>(i);
}

std::array<int, 64> quantization_table(int quality) {
    if (quality < 10 || quality > 100) {
        throw ArgumentError("jpeg quality must be in [10, 100], got " + std::to_string(quality));
    }
    const double scale = quality < 50 ? 5000.0 / quality : 200.0 - 2.0 * quality;
    std::array<int, 64> table{};
    for (std::size_t i = 0; i < 64; ++i) {
        table[i] = std::max(1, static_cast<int>(std::lround(kLuminanceTable[i] * scale / 100.0)));
    }
    return table;
}

namespace {

using Block = std::array<double, 64>;

// Orthonormal DCT-II basis: basis[u][x].
std::array<std::array<double, 8>, 8> dct_basis() {
    std::array<std::array<double, 8>, 8> b{};
    for (std::size_t u = 0; u < 8; ++u) {
        const double cu = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
        for (std::size_t x = 0; x < 8; ++x) {
            b[u][x] = cu * std::cos((2.0 * x + 1.0) * u * std::numbers::pi / 16.0);
        }
    }
    return b;
}

void forward_dct(const Block& in, Block& out, const std::array<std::array<double, 8>, 8>& b) {
    Block tmp{};
    for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t u = 0; u < 8; ++u) {
            double s = 0.0;
            for (std::size_t x = 0; x < 8; ++x) s += b[u][x] * in[y * 8 + x];
            tmp[y * 8 + u] = s;
        }
    for (std::size_t v = 0; v < 8; ++v)
        for (std::size_t u = 0; u < 8; ++u) {
            double s = 0.0;
            for (std::size_t y = 0; y < 8; ++y) s += b[v][y] * tmp[y * 8 + u];
            out[v * 8 + u] = s;
        }
}

void inverse_dct(const Block& in, Block& out, const std::array<std::array<double, 8>, 8>& b) {
    Block tmp{};
    for (std::size_t v = 0; v < 8; ++v)
        for (std::size_t x = 0; x < 8; ++x) {
            double s = 0.0;
            for (std::size_t u = 0; u < 8; ++u) s += b[u][x] * in[v * 8 + u];
            tmp[v * 8 + x] = s;
        }
    for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t x = 0; x < 8; ++x) {
            double s = 0.0;
            for (std::size_t v = 0; v < 8; ++v) s += b[v][y] * tmp[v * 8 + x];
            out[y * 8 + x] = s;
        }
}

float clamp_unit(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

}  // namespace

Image jpeg_like(const Image& image, int quality) {
    const auto table = quantization_table(quality);
    static const auto basis = dct_basis();
    const std::size_t ph = (image.height + 7) / 8 * 8;
    const std::size_t pw = (image.width + 7) / 8 * 8;
    Image out(image.channels, image.height, image.width);
    Block block{};
    Block coef{};
    for (std::size_t c = 0; c < image.channels; ++c) {
        for (std::size_t by = 0; by < ph; by += 8) {
            for (std::size_t bx = 0; bx < pw; bx += 8) {
                for (std::size_t y = 0; y < 8; ++y)
                    for (std::size_t x = 0; x < 8; ++x) {
                        const auto sy = reflect_index(static_cast<std::ptrdiff_t>(by + y), image.height);
                        const auto sx = reflect_index(static_cast<std::ptrdiff_t>(bx + x), image.width);
                        block[y * 8 + x] = 255.0 * image.at(c, sy, sx) - 128.0;
                    }
                forward_dct(block, coef, basis);
                for (std::size_t i = 0; i < 64; ++i) {
                    coef[i] = std::round(coef[i] / table[i]) * table[i];
                }
                inverse_dct(coef, block, basis);
                for (std::size_t y = 0; y < 8 && by + y < image.height; ++y)
                    for (std::size_t x = 0; x < 8 && bx + x < image.width; ++x) {
                        out.at(c, by + y, bx + x) = clamp_unit((block[y * 8 + x] + 128.0) / 255.0);
                    }
            }
        }
    }
    return out;
}

std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw ArgumentError("blur sigma must be finite and >= 0");
    }
    if (sigma == 0.0) return {1.0};
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        const double w = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = w;
        total += w;
    }
    for (double& w : k) w /= total;
    return k;
}

Image gaussian_blur(const Image& image, double sigma) {
    const auto kernel = gaussian_kernel(sigma);
    if (kernel.size() == 1) return image;
    const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    const std::size_t h = image.height;
    const std::size_t w = image.width;
    std::vector<double> rows(h * w);
    Image out(image.channels, h, w);
    for (std::size_t c = 0; c < image.channels; ++c) {
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                double s = 0.0;
                for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                    const auto sx = reflect_index(static_cast<std::ptrdiff_t>(x) + k, w);
                    s += kernel[static_cast<std::size_t>(k + radius)] * image.at(c, y, sx);
                }
                rows[y * w + x] = s;
            }
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                double s = 0.0;
                for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                    const auto sy = reflect_index(static_cast<std::ptrdiff_t>(y) + k, h);
                    s += kernel[static_cast<std::size_t>(k + radius)] * rows[sy * w + x];
                }
                out.at(c, y, x) = clamp_unit(s);
            }
    }
    return out;
}

std::vector<double> gaussian_noise_field(std::size_t count, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw ArgumentError("noise sigma must be finite and >= 0");
    }
    Rng rng(seed);
    std::vector<double> field(count);
    for (double& v : field) v = sigma * rng.normal();
    return field;
}

Image gaussian_noise(const Image& image, double sigma, std::uint64_t seed) {
    const auto field = gaussian_noise_field(image.pixels.size(), sigma, seed);
    if (sigma == 0.0) return image;
    Image out = image;
    for (std::size_t i = 0; i < field.size(); ++i) {
        out.pixels[i] = clamp_unit(static_cast<double>(image.pixels[i]) + field[i]);
    }
    return out;
}

Image downsample(const Image& image, int factor) {
    if (factor != 1 && factor != 2 && factor != 4) {
        throw ArgumentError("downsample factor must be 1, 2 or 4, got " + std::to_string(factor));
    }
    const auto f = static_cast<std::size_t>(factor);
    if (image.height % f != 0 || image.width % f != 0) {
        throw ShapeError("image " + std::to_string(image.height) + "x" +
                         std::to_string(image.width) + " not divisible by factor " +
                         std::to_string(factor));
    }
    if (f == 1) return image;
    Image out(image.channels, image.height / f, image.width / f);
    const double inv = 1.0 / static_cast<double>(f * f);
    for (std::size_t c = 0; c < out.channels; ++c)
        for (std::size_t y = 0; y < out.height; ++y)
            for (std::size_t x = 0; x < out.width; ++x) {
                double s = 0.0;
                for (std::size_t dy = 0; dy < f; ++dy)
                    for (std::size_t dx = 0; dx < f; ++dx) s += image.at(c, y * f + dy, x * f + dx);
                out.at(c, y, x) = clamp_unit(s * inv);
            }
    return out;
}

Image resize_bilinear(const Image& image, std::size_t height, std::size_t width) {
    if (height == 0 || width == 0 || image.height == 0 || image.width == 0) {
        throw ShapeError("resize to or from an empty image");
    }
    if (height == image.height && width == image.width) return image;
    struct Tap {
        std::size_t i0, i1;
        double t;
    };
    auto taps = [](std::size_t out_n, std::size_t in_n) {
        std::vector<Tap> result(out_n);
        const double ratio = static_cast<double>(in_n) / static_cast<double>(out_n);
        for (std::size_t o = 0; o < out_n; ++o) {
            const double src = std::clamp((o + 0.5) * ratio - 0.5, 0.0, static_cast<double>(in_n - 1));
            const auto i0 = static_cast<std::size_t>(std::floor(src));
            result[o] = {i0, std::min(i0 + 1, in_n - 1), src - static_cast<double>(i0)};
        }
        return result;
    };
    const auto ty = taps(height, image.height);
    const auto tx = taps(width, image.width);
    Image out(image.channels, height, width);
    for (std::size_t c = 0; c < image.channels; ++c)
        for (std::size_t y = 0; y < height; ++y)
            for (std::size_t x = 0; x < width; ++x) {
                const auto& a = ty[y];
                const auto& b = tx[x];
                const double top = (1 - b.t) * image.at(c, a.i0, b.i0) + b.t * image.at(c, a.i0, b.i1);
                const double bot = (1 - b.t) * image.at(c, a.i1, b.i0) + b.t * image.at(c, a.i1, b.i1);
                out.at(c, y, x) = clamp_unit((1 - a.t) * top + a.t * bot);
            }
    return out;
}

CorruptionKind parse_corruption_kind(std::string_view name) {
    if (name == "jpeg_like" || name == "jpeg") return CorruptionKind::JpegLike;
    if (name == "gaussian_blur" || name == "blur") return CorruptionKind::GaussianBlur;
    if (name == "gaussian_noise" || name == "noise") return CorruptionKind::GaussianNoise;
    if (name == "downsample") return CorruptionKind::Downsample;
    throw ArgumentError("unknown corruption kind '" + std::string(name) + "'");
}

std::string corruption_name(CorruptionKind kind) {
    switch (kind) {
        case CorruptionKind::JpegLike: return "jpeg_like";
        case CorruptionKind::GaussianBlur: return "gaussian_blur";
        case CorruptionKind::GaussianNoise: return "gaussian_noise";
        case CorruptionKind::Downsample: return "downsample";
    }
    return "?";
}

double identity_severity(CorruptionKind kind) {
    switch (kind) {
        case CorruptionKind::JpegLike: return 100.0;
        case CorruptionKind::GaussianBlur: return 0.0;
        case CorruptionKind::GaussianNoise: return 0.0;
        case CorruptionKind::Downsample: return 1.0;
    }
    return 0.0;
}

void validate(const CorruptionSpec& spec) {
    const double s = spec.severity;
    bool ok = std::isfinite(s);
    switch (spec.kind) {
        case CorruptionKind::JpegLike: ok = ok && s >= 10 && s <= 100 && s == std::round(s); break;
        case CorruptionKind::GaussianBlur: ok = ok && s >= 0 && s <= 5; break;
        case CorruptionKind::GaussianNoise: ok = ok && s >= 0 && s <= 0.2; break;
        case CorruptionKind::Downsample: ok = ok && (s == 1 || s == 2 || s == 4); break;
    }
    if (!ok) {
        throw ArgumentError("severity " + std::to_string(s) + " out of range for " +
                            corruption_name(spec.kind));
    }
}

Image apply(const Image& image, const CorruptionSpec& spec) {
    validate(spec);
    switch (spec.kind) {
        case CorruptionKind::JpegLike: return jpeg_like(image, static_cast<int>(spec.severity));
        case CorruptionKind::GaussianBlur: return gaussian_blur(image, spec.severity);
        case CorruptionKind::GaussianNoise: return gaussian_noise(image, spec.severity, spec.seed);
        case CorruptionKind::Downsample: return downsample(image, static_cast<int>(spec.severity));
    }
    return image;
}

}  // namespace lasted::postproc
