#include <algorithm>
#include <cmath>
#include <cstdint>

#include "lasted/data/data.hpp"
#include "lasted/error.hpp"
#include "lasted/postproc/postproc.hpp"
#include "lasted/random.hpp"

namespace lasted::data {

namespace {

void check_patch(std::size_t height, std::size_t width, std::size_t patch) {
    if (patch == 0 || height < patch || width < patch) {
        throw ShapeError("image " + std::to_string(height) + "x" + std::to_string(width) +
                         " smaller than patch " + std::to_string(patch));
    }
}

}  // namespace

AugmentPlan plan_augmentation(std::size_t height, std::size_t width, std::size_t patch,
                              std::uint64_t seed, const AugmentPolicy& policy) {
    check_patch(height, width, patch);
    Rng rng(seed);
    AugmentPlan plan;
    plan.y0 = rng.below(height - patch + 1);
    plan.x0 = rng.below(width - patch + 1);
    if (rng.uniform() < 1.0 - policy.probability) return plan;
    switch (rng.below(3)) {
        case 0:
            plan.kind = AugmentKind::Compression;
            plan.severity = static_cast<double>(
                policy.min_quality + static_cast<int>(rng.below(static_cast<std::size_t>(101 - policy.min_quality))));
            break;
        case 1:
            plan.kind = AugmentKind::Blur;
            plan.severity = rng.uniform(policy.min_blur_sigma, policy.max_blur_sigma);
            break;
        default:
            plan.kind = AugmentKind::Rescale;
            plan.severity = rng.uniform(policy.min_scale, policy.max_scale);
            break;
    }
    return plan;
}

Image apply_plan(const Image& image, const AugmentPlan& plan, std::size_t patch) {
    Image out = image.crop(plan.y0, plan.x0, patch, patch);
    switch (plan.kind) {
        case AugmentKind::None: return out;
        case AugmentKind::Compression: return postproc::jpeg_like(out, static_cast<int>(plan.severity));
        case AugmentKind::Blur: return postproc::gaussian_blur(out, plan.severity);
        case AugmentKind::Rescale: {
            const auto side = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::lround(plan.severity * static_cast<double>(patch))));
            Image scaled = postproc::resize_bilinear(out, side, side);
            if (side >= patch) return center_crop(scaled, patch);
            return postproc::resize_bilinear(scaled, patch, patch);
        }
    }
    return out;
}

Image augment_train(const ImageSample& sample, std::size_t patch, std::uint64_t seed,
                    const AugmentPolicy& policy) {
    const auto plan = plan_augmentation(sample.pixels.height, sample.pixels.width, patch, seed, policy);
    return apply_plan(sample.pixels, plan, patch);
}

Image center_crop(const Image& image, std::size_t patch) {
    check_patch(image.height, image.width, patch);
    return image.crop((image.height - patch) / 2, (image.width - patch) / 2, patch, patch);
}

Image center_crop_eval(const ImageSample& sample, std::size_t patch) {
    return center_crop(sample.pixels, patch);
}

std::vector<std::vector<std::size_t>> label_pools(const Corpus& corpus,
                                                  const labels::LabelSet& set) {
    std::vector<std::vector<std::size_t>> pools(set.size());
    for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
        const auto& s = corpus.samples[i];
        pools[set.index_of(s.authenticity, s.medium)].push_back(i);
    }
    return pools;
}

BalancedBatches::BalancedBatches(std::vector<std::vector<std::size_t>> pools,
                                 std::size_t batch_size, std::uint64_t seed)
    : pools_(std::move(pools)), seed_(seed) {
    const std::size_t c = pools_.size();
    if (c == 0 || batch_size == 0 || batch_size % c != 0) {
        throw ArgumentError("batch size " + std::to_string(batch_size) +
                            " is not a positive multiple of the label count " + std::to_string(c));
    }
    per_label_ = batch_size / c;
    batches_per_epoch_ = SIZE_MAX;
    for (std::size_t l = 0; l < c; ++l) {
        if (pools_[l].size() < per_label_) {
            throw ArgumentError("label " + std::to_string(l) + " has " +
                                std::to_string(pools_[l].size()) + " samples, needs at least " +
                                std::to_string(per_label_) + " per batch");
        }
        batches_per_epoch_ = std::min(batches_per_epoch_, pools_[l].size() / per_label_);
    }
}

std::vector<Batch> BalancedBatches::epoch(std::size_t index) const {
    std::vector<std::vector<std::size_t>> order = pools_;
    for (std::size_t l = 0; l < order.size(); ++l) {
        Rng rng(derive_seed(seed_, {index, l}));
        rng.shuffle(std::span<std::size_t>(order[l]));
    }
    std::vector<Batch> batches(batches_per_epoch_);
    for (std::size_t b = 0; b < batches_per_epoch_; ++b) {
        for (std::size_t l = 0; l < order.size(); ++l) {
            for (std::size_t k = 0; k < per_label_; ++k) {
                batches[b].samples.push_back(order[l][b * per_label_ + k]);
                batches[b].labels.push_back(l);
            }
        }
    }
    return batches;
}

}  // namespace lasted::data
