#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace lasted {

/// Planar (channel-major) image with float samples, nominally in [0, 1].
struct Image {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> pixels;

    Image() = default;
    Image(std::size_t c, std::size_t h, std::size_t w, float fill = 0.0f)
        : channels(c), height(h), width(w), pixels(c * h * w, fill) {}

    std::size_t plane_size() const { return height * width; }
    float& at(std::size_t c, std::size_t y, std::size_t x) {
        return pixels[(c * height + y) * width + x];
    }
    float at(std::size_t c, std::size_t y, std::size_t x) const {
        return pixels[(c * height + y) * width + x];
    }

    /// Copy of the h x w window whose top-left corner is (y0, x0).
    Image crop(std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) const;

    bool operator==(const Image&) const = default;
};

/// Binary PPM (P6, maxval 255). Errors name the offending file.
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& image);

/// Rounds every sample to the nearest of 256 levels, as stored on disk.
void quantize_8bit(Image& image);

}  // namespace lasted
