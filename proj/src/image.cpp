#include "lasted/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "lasted/error.hpp"

namespace lasted {

Image Image::crop(std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) const {
    if (y0 + h > height || x0 + w > width) {
        throw ShapeError("crop window " + std::to_string(h) + "x" + std::to_string(w) + " at (" +
                         std::to_string(y0) + "," + std::to_string(x0) + ") exceeds image " +
                         std::to_string(height) + "x" + std::to_string(width));
    }
    Image out(channels, h, w);
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t y = 0; y < h; ++y) {
            const float* src = &pixels[(c * height + y0 + y) * width + x0];
            std::copy(src, src + w, &out.pixels[(c * h + y) * w]);
        }
    }
    return out;
}

namespace {

// Reads one whitespace-delimited header field, skipping '#' comments.
std::size_t header_field(const std::string& bytes, std::size_t& pos,
                         const std::filesystem::path& path) {
    while (pos < bytes.size()) {
        const unsigned char ch = static_cast<unsigned char>(bytes[pos]);
        if (std::isspace(ch)) {
            ++pos;
        } else if (ch == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
        value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
        ++pos;
        if (++digits > 9) {
            throw DataError("malformed PPM header in " + path.string());
        }
    }
    if (digits == 0) {
        throw DataError("malformed PPM header in " + path.string());
    }
    return value;
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open image " + path.string());
    }
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
        throw DataError("not a binary PPM (P6): " + path.string());
    }
    std::size_t pos = 2;
    const std::size_t width = header_field(bytes, pos, path);
    const std::size_t height = header_field(bytes, pos, path);
    const std::size_t maxval = header_field(bytes, pos, path);
    if (width == 0 || height == 0 || maxval != 255) {
        throw DataError("unsupported PPM geometry or maxval in " + path.string());
    }
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        throw DataError("malformed PPM header in " + path.string());
    }
    ++pos;
    const std::size_t expected = width * height * 3;
    if (bytes.size() - pos < expected) {
        throw DataError("truncated PPM " + path.string() + ": expected " +
                        std::to_string(expected) + " pixel bytes, found " +
                        std::to_string(bytes.size() - pos));
    }
    Image image(3, height, width);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                const auto byte = static_cast<unsigned char>(bytes[pos++]);
                image.at(c, y, x) = static_cast<float>(byte) / 255.0f;
            }
        }
    }
    return image;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
    if (image.channels != 3) {
        throw ArgumentError("write_ppm: expected 3 channels, got " +
                            std::to_string(image.channels));
    }
    std::string bytes = "P6\n" + std::to_string(image.width) + " " +
                        std::to_string(image.height) + "\n255\n";
    bytes.reserve(bytes.size() + image.pixels.size());
    for (std::size_t y = 0; y < image.height; ++y) {
        for (std::size_t x = 0; x < image.width; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                const float v = std::clamp(image.at(c, y, x), 0.0f, 1.0f);
                bytes.push_back(static_cast<char>(std::lround(v * 255.0f)));
            }
        }
    }
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw DataError("cannot write image " + path.string());
    }
}

void quantize_8bit(Image& image) {
    for (float& v : image.pixels) {
        v = static_cast<float>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)) / 255.0f;
    }
}

}  // namespace lasted
