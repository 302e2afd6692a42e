#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lasted/image.hpp"
#include "lasted/labels/labels.hpp"

namespace lasted::data {

enum class Category { RealPhoto, RealPainting, SyntheticPhoto, SyntheticPainting };

inline constexpr std::array<Category, 4> kCategories{
    Category::RealPhoto, Category::RealPainting, Category::SyntheticPhoto,
    Category::SyntheticPainting};

/// On-disk directory name, e.g. "synthetic_photo".
std::string category_dir(Category category);
/// Throws DataError for anything but the four directory names.
Category parse_category_dir(std::string_view name);
labels::Authenticity authenticity_of(Category category);
labels::Medium medium_of(Category category);
Category category_of(labels::Authenticity authenticity, labels::Medium medium);

enum class Split { Train, Val, Test, TestUnseen };
inline constexpr std::array<Split, 4> kSplits{Split::Train, Split::Val, Split::Test,
                                              Split::TestUnseen};
std::string split_name(Split split);

struct ImageSample {
    Image pixels;
    labels::Authenticity authenticity = labels::Authenticity::Real;
    labels::Medium medium = labels::Medium::Photo;
    std::string generator_id = "none";
    std::uint64_t seed = 0;

    Category category() const { return category_of(authenticity, medium); }
};

/// Upsampling factor planted by a generator id: "none" -> 1, "checkerK" -> K
/// for K in {2, 3}. Throws ArgumentError otherwise.
int generator_factor(std::string_view generator_id);

struct ToyOptions {
    /// Relative strength of the periodic modulation on synthetic images.
    double artifact_amplitude = 0.06;
};

/// Deterministic toy image. Real categories require generator "none" and
/// synthetic ones a checker generator. Pixels are 8-bit quantized so they
/// survive a PPM round trip exactly.
ImageSample generate_toy_sample(Category category, std::string_view generator_id,
                                std::uint64_t seed, std::size_t size,
                                const ToyOptions& options = {});

/// Images of one split.
struct Corpus {
    std::vector<ImageSample> samples;

    std::size_t size() const { return samples.size(); }
    std::size_t count(Category category) const;
    std::vector<std::size_t> indices_of(Category category) const;
};

/// root/{real_photo,...}/*.ppm with optional meta.tsv per directory
/// (filename, generator_id, seed). Absent category directories are allowed;
/// empty or unknown ones are errors.
Corpus load_corpus(const std::filesystem::path& root);
void write_corpus(const std::filesystem::path& root, const Corpus& corpus);

struct Dataset {
    Corpus train;
    Corpus val;
    Corpus test;
    /// Synthetic images from the held-out generator only.
    Corpus test_unseen;

    const Corpus& split(Split s) const;
};

struct ToyDatasetSpec {
    std::uint64_t master_seed = 0;
    std::size_t image_size = 72;
    std::size_t train_per_category = 400;
    std::size_t val_per_category = 40;
    std::size_t test_per_category = 200;
    std::size_t unseen_per_category = 200;
    std::string train_generator = "checker2";
    std::string unseen_generator = "checker3";
    ToyOptions toy;
};

/// Seed of the sample with global index `index`: splitmix64(master ^ index).
std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t index);

/// Every sample gets a distinct global index, so seeds never repeat across
/// splits.
Dataset generate_dataset(const ToyDatasetSpec& spec);
/// Writes root/{train,val,test,test_unseen}/<category>/.
void write_dataset(const std::filesystem::path& root, const Dataset& dataset);
/// Reads the layout written by write_dataset; test_unseen may be absent.
Dataset load_dataset(const std::filesystem::path& root);

struct AugmentPolicy {
    double probability = 0.5;
    int min_quality = 30;
    double min_blur_sigma = 0.2;
    double max_blur_sigma = 2.0;
    double min_scale = 0.5;
    double max_scale = 1.5;
};

enum class AugmentKind { None, Compression, Blur, Rescale };

struct AugmentPlan {
    std::size_t y0 = 0;
    std::size_t x0 = 0;
    AugmentKind kind = AugmentKind::None;
    double severity = 0.0;
};

/// Seeded draws: crop offsets, then whether to post-process (draw >= 1 - p),
/// then a uniform choice of kind and its severity.
AugmentPlan plan_augmentation(std::size_t height, std::size_t width, std::size_t patch,
                              std::uint64_t seed, const AugmentPolicy& policy = {});
Image apply_plan(const Image& image, const AugmentPlan& plan, std::size_t patch);
Image augment_train(const ImageSample& sample, std::size_t patch, std::uint64_t seed,
                    const AugmentPolicy& policy = {});

Image center_crop(const Image& image, std::size_t patch);
Image center_crop_eval(const ImageSample& sample, std::size_t patch);

/// Sample indices grouped by label index under `set`.
std::vector<std::vector<std::size_t>> label_pools(const Corpus& corpus,
                                                  const labels::LabelSet& set);

struct Batch {
    std::vector<std::size_t> samples;
    std::vector<std::size_t> labels;
};

/// Epochs of batches holding exactly batch_size / C samples of every label.
class BalancedBatches {
public:
    BalancedBatches(std::vector<std::vector<std::size_t>> pools, std::size_t batch_size,
                    std::uint64_t seed);

    std::size_t per_label() const { return per_label_; }
    std::size_t batches_per_epoch() const { return batches_per_epoch_; }
    std::vector<Batch> epoch(std::size_t index) const;

private:
    std::vector<std::vector<std::size_t>> pools_;
    std::size_t per_label_ = 0;
    std::size_t batches_per_epoch_ = 0;
    std::uint64_t seed_ = 0;
};

}  // namespace lasted::data
