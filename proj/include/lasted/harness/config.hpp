#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lasted/baselines/baselines.hpp"
#include "lasted/data/data.hpp"
#include "lasted/encoders/encoders.hpp"
#include "lasted/identify/identify.hpp"
#include "lasted/labels/labels.hpp"

namespace lasted::harness {

struct RunConfig {
    std::uint64_t seed = 7;
    labels::LabelStrategy labels = labels::LabelStrategy::R2;
    baselines::Paradigm paradigm = baselines::Paradigm::Lasted;

    /// Corpus root with train/val/test[/test_unseen]; empty means the toy
    /// corpus generated from `seed`.
    std::string data_dir;
    /// Corpus whose real images form the anchor pool; empty means the
    /// training split.
    std::string anchor_dir;
    std::string out_dir = "out";

    std::size_t train_per_category = 800;
    std::size_t val_per_category = 40;
    std::size_t test_per_category = 200;
    std::size_t unseen_per_category = 200;
    std::size_t image_size = 72;
    double artifact_amplitude = 0.06;

    std::size_t patch = 64;
    std::size_t batch_size = 32;
    std::size_t embed_dim = 64;
    std::size_t text_dim = 32;
    std::vector<std::size_t> channels{8, 16, 32, 32};

    std::size_t epochs = 20;
    /// Stops training after this many steps; 0 means no limit.
    std::size_t max_steps = 0;
    double learning_rate = 1e-3;
    double lr_decay = 0.5;
    std::size_t lr_patience = 2;
    double augment_probability = 0.5;

    std::size_t n_pos = 5000;
    std::size_t n_neg = 5000;
    std::size_t val_pairs = 1000;
    std::size_t anchor_size = 100;
    std::uint64_t anchor_seed = 1;
    identify::DecisionThreshold threshold;
    /// Also emit the text-encoder label prediction for every query.
    bool predict_labels = false;

    std::vector<std::size_t> sweep_sizes{1, 10, 50, 100};
    std::size_t sweep_repeats = 50;
    data::Split sweep_split = data::Split::TestUnseen;

    std::vector<double> jpeg_grid{90, 70, 50, 30};
    std::vector<double> blur_grid{0.5, 1, 2};
    std::vector<double> noise_grid{0.02, 0.05, 0.1};
    std::vector<double> downsample_grid{2, 4};

    std::vector<labels::LabelStrategy> ablation_strategies{
        labels::LabelStrategy::R1, labels::LabelStrategy::R2, labels::LabelStrategy::R3,
        labels::LabelStrategy::R4, labels::LabelStrategy::R5};
};

/// Assigns one key; throws ArgumentError for unknown keys or bad values.
void set_value(RunConfig& cfg, std::string_view key, std::string_view value);
/// Applies `key = value` lines; '#' starts a comment.
void apply_text(RunConfig& cfg, std::string_view text);
void apply_file(RunConfig& cfg, const std::filesystem::path& path);
RunConfig parse_config(std::string_view text);

/// Canonical `key = value` listing of every field, in a fixed order.
std::string to_text(const RunConfig& cfg);
/// FNV-1a of the canonical text without out_dir, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Cross-field checks (batch divisible by label count, patch fits, ...).
void validate(const RunConfig& cfg);

std::size_t class_count(const RunConfig& cfg);
encoders::EncoderConfig encoder_config(const RunConfig& cfg);
data::ToyDatasetSpec toy_spec(const RunConfig& cfg);
data::AugmentPolicy augment_policy(const RunConfig& cfg);
data::Split parse_split(std::string_view name);

}  // namespace lasted::harness
