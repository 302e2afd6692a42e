#pragma once

#include <vector>

#include "lasted/image.hpp"
#include "oracles.hpp"

namespace lasted::oracle {

/// Channel mean of an image as a single plane.
inline std::vector<double> gray_plane(const Image& image) {
    std::vector<double> plane(image.plane_size(), 0.0);
    for (std::size_t c = 0; c < image.channels; ++c)
        for (std::size_t i = 0; i < plane.size(); ++i)
            plane[i] += image.pixels[c * plane.size() + i] / static_cast<double>(image.channels);
    return plane;
}

inline double nyquist_magnitude(const Image& image) {
    const auto plane = gray_plane(image);
    return dft_magnitude(plane, image.height, image.width, image.height / 2, image.width / 2);
}

/// Nyquist magnitude over the mean of its eight neighboring bins.
inline double nyquist_ratio(const Image& image) {
    const auto plane = gray_plane(image);
    const std::size_t h = image.height;
    const std::size_t w = image.width;
    const double peak = dft_magnitude(plane, h, w, h / 2, w / 2);
    double around = 0.0;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            if (dy == 0 && dx == 0) continue;
            around += dft_magnitude(plane, h, w, h / 2 + dy, w / 2 + dx);
        }
    return peak / (around / 8.0);
}

}  // namespace lasted::oracle
