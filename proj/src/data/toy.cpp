#include <algorithm>
#include <cmath>
#include <numbers>

#include "lasted/data/data.hpp"
#include "lasted/error.hpp"
#include "lasted/random.hpp"

namespace lasted::data {

namespace {

using Plane = std::vector<double>;

// Bilinearly interpolated lattice of uniform values in [-1, 1].
void add_value_noise(Plane& plane, std::size_t h, std::size_t w, double cell, double amp,
                     Rng& rng) {
    const auto gh = static_cast<std::size_t>(std::ceil(h / cell)) + 2;
    const auto gw = static_cast<std::size_t>(std::ceil(w / cell)) + 2;
    std::vector<double> lattice(gh * gw);
    for (double& v : lattice) v = rng.uniform(-1.0, 1.0);
    const double oy = cell > 1.0 ? rng.uniform() * cell : 0.0;
    const double ox = cell > 1.0 ? rng.uniform() * cell : 0.0;
    for (std::size_t y = 0; y < h; ++y) {
        const double fy = (y + oy) / cell;
        const auto iy = static_cast<std::size_t>(fy);
        const double ty = fy - iy;
        for (std::size_t x = 0; x < w; ++x) {
            const double fx = (x + ox) / cell;
            const auto ix = static_cast<std::size_t>(fx);
            const double tx = fx - ix;
            const double top = (1 - tx) * lattice[iy * gw + ix] + tx * lattice[iy * gw + ix + 1];
            const double bot =
                (1 - tx) * lattice[(iy + 1) * gw + ix] + tx * lattice[(iy + 1) * gw + ix + 1];
            plane[y * w + x] += amp * ((1 - ty) * top + ty * bot);
        }
    }
}

// Standardizes the joint channel values to the given mean and spread.
void standardize(std::vector<Plane>& planes, double mean, double spread) {
    double sum = 0.0;
    double sq = 0.0;
    std::size_t n = 0;
    for (const auto& p : planes)
        for (double v : p) {
            sum += v;
            sq += v * v;
            ++n;
        }
    const double mu = sum / n;
    const double sd = std::sqrt(std::max(sq / n - mu * mu, 1e-12));
    for (auto& p : planes)
        for (double& v : p) v = mean + spread * (v - mu) / sd;
}

// Multi-octave value noise with amplitude growing as a power of the cell
// size, plus a coarse per-channel tint.
std::vector<Plane> photo_base(std::size_t h, std::size_t w, Rng& rng) {
    const double slope = rng.uniform(0.6, 0.9);
    Plane luma(h * w, 0.0);
    for (double cell = 1.0; cell <= 32.0; cell *= 2.0) {
        add_value_noise(luma, h, w, cell, std::pow(cell, slope), rng);
    }
    std::vector<Plane> planes(3, luma);
    const double tint = rng.uniform(0.5, 2.5);
    for (auto& p : planes) {
        add_value_noise(p, h, w, 16.0, tint, rng);
        add_value_noise(p, h, w, 32.0, 2.0 * tint, rng);
    }
    standardize(planes, rng.uniform(0.4, 0.6), rng.uniform(0.12, 0.2));
    return planes;
}

// Linear ramps and coarse noise, posterized per channel, with a faint grain.
std::vector<Plane> painting_base(std::size_t h, std::size_t w, Rng& rng) {
    const double levels = static_cast<double>(4 + rng.below(5));
    const double extent = static_cast<double>(std::max(h, w));
    std::vector<Plane> planes(3, Plane(h * w, 0.0));
    for (auto& p : planes) {
        for (int g = 0; g < 2; ++g) {
            const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double gain = rng.uniform(0.5, 1.5);
            const double cy = std::sin(theta) / extent;
            const double cx = std::cos(theta) / extent;
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) p[y * w + x] += gain * (cy * y + cx * x);
        }
        add_value_noise(p, h, w, 24.0, 0.5, rng);
        add_value_noise(p, h, w, 12.0, 0.2, rng);
        const auto [lo_it, hi_it] = std::minmax_element(p.begin(), p.end());
        const double lo = *lo_it;
        const double span = std::max(*hi_it - lo, 1e-9);
        const double out_lo = rng.uniform(0.05, 0.3);
        const double out_hi = rng.uniform(0.7, 0.95);
        for (double& v : p) {
            const double t = std::min(std::floor((v - lo) / span * levels), levels - 1.0);
            v = out_lo + (out_hi - out_lo) * (t + 0.5) / levels;
        }
    }
    for (std::size_t i = 0; i < h * w; ++i) {
        const double grain = 0.01 * rng.uniform(-1.0, 1.0);
        for (auto& p : planes) p[i] += grain;
    }
    return planes;
}

// Zero-mean periodic pattern with period `factor` along both axes.
double modulation(std::size_t y, std::size_t x, int factor) {
    if (factor == 2) return ((x + y) % 2 == 0) ? 1.0 : -1.0;
    const double k = 2.0 * std::numbers::pi / factor;
    return std::cos(k * (y % factor)) * std::cos(k * (x % factor));
}

}  // namespace

int generator_factor(std::string_view generator_id) {
    if (generator_id == "none") return 1;
    if (generator_id == "checker2") return 2;
    if (generator_id == "checker3") return 3;
    throw ArgumentError("unknown generator_id '" + std::string(generator_id) + "'");
}

ImageSample generate_toy_sample(Category category, std::string_view generator_id,
                                std::uint64_t seed, std::size_t size,
                                const ToyOptions& options) {
    if (size < 64) {
        throw ArgumentError("toy image size must be >= 64, got " + std::to_string(size));
    }
    const int factor = generator_factor(generator_id);
    const bool synthetic = authenticity_of(category) == labels::Authenticity::Synthetic;
    if (synthetic != (factor > 1)) {
        throw ArgumentError("generator '" + std::string(generator_id) +
                            "' does not apply to category " + category_dir(category));
    }
    const auto f = static_cast<std::size_t>(factor);
    const std::size_t base = (size + f - 1) / f;
    Rng rng(seed);
    const auto planes = medium_of(category) == labels::Medium::Photo ? photo_base(base, base, rng)
                                                                     : painting_base(base, base, rng);
    ImageSample sample;
    sample.authenticity = authenticity_of(category);
    sample.medium = medium_of(category);
    sample.generator_id = std::string(generator_id);
    sample.seed = seed;
    sample.pixels = Image(3, size, size);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < size; ++y)
            for (std::size_t x = 0; x < size; ++x) {
                double v = planes[c][(y / f) * base + x / f];
                if (factor > 1) v *= 1.0 + options.artifact_amplitude * modulation(y, x, factor);
                sample.pixels.at(c, y, x) = static_cast<float>(v);
            }
    quantize_8bit(sample.pixels);
    return sample;
}

std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(master_seed ^ index);
}

Dataset generate_dataset(const ToyDatasetSpec& spec) {
    generator_factor(spec.train_generator);
    generator_factor(spec.unseen_generator);
    Dataset out;
    std::uint64_t index = 0;
    auto fill = [&](Corpus& corpus, std::size_t per_category, const std::string& synth_gen,
                    bool synthetic_only) {
        for (Category c : kCategories) {
            const bool synthetic = authenticity_of(c) == labels::Authenticity::Synthetic;
            if (synthetic_only && !synthetic) continue;
            for (std::size_t i = 0; i < per_category; ++i) {
                corpus.samples.push_back(generate_toy_sample(
                    c, synthetic ? synth_gen : "none", sample_seed(spec.master_seed, index++),
                    spec.image_size, spec.toy));
            }
        }
    };
    fill(out.train, spec.train_per_category, spec.train_generator, false);
    fill(out.val, spec.val_per_category, spec.train_generator, false);
    fill(out.test, spec.test_per_category, spec.train_generator, false);
    fill(out.test_unseen, spec.unseen_per_category, spec.unseen_generator, true);
    return out;
}

}  // namespace lasted::data
