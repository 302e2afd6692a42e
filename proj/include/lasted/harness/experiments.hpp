#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lasted/data/data.hpp"
#include "lasted/harness/checkpoint.hpp"
#include "lasted/harness/config.hpp"
#include "lasted/identify/identify.hpp"
#include "lasted/postproc/postproc.hpp"

namespace lasted::harness {

/// The configured corpus: loaded from cfg.data_dir, or generated.
data::Dataset prepare_dataset(const RunConfig& cfg);

struct StepRecord {
    std::size_t epoch = 0;
    std::size_t step = 0;
    double loss = 0.0;
    double image_axis = 0.0;
    double text_axis = 0.0;
    double inverse_temperature = 0.0;
    double learning_rate = 0.0;
};

struct EpochRecord {
    std::size_t epoch = 0;
    std::size_t steps = 0;
    double loss = 0.0;
    double image_axis = 0.0;
    double text_axis = 0.0;
    double inverse_temperature = 0.0;
    double val_auc = 0.0;
    double learning_rate = 0.0;
    bool best = false;
};

/// Multiplies the learning rate by `decay` once `patience` consecutive
/// epochs pass without a new best validation score, then starts counting
/// again.
struct PlateauSchedule {
    std::size_t patience = 2;
    double decay = 0.5;
    double best = -std::numeric_limits<double>::infinity();
    std::size_t stagnant = 0;

    /// Records one epoch's score; returns true when it is a new best.
    bool update(double score, double& learning_rate);
};

struct TrainResult {
    /// Best-validation parameters at checkpoint (32-bit) precision.
    Model model;
    std::vector<StepRecord> steps;
    std::vector<EpochRecord> epochs;
};

/// Trains cfg.paradigm. With `write_outputs`, writes model.lstd and
/// train_log.csv under cfg.out_dir. A non-finite loss dumps the current
/// state to diverged.lstd and throws NonFiniteError.
TrainResult run_train(const RunConfig& cfg, const data::Dataset& dataset, bool write_outputs = true,
                      const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Image embeddings of center-cropped samples, optionally post-processed
/// after the crop. Downsampled crops are resized back to the patch size.
std::vector<identify::Vector> embed_samples(const Model& model, const data::Corpus& corpus,
                                            std::span<const std::size_t> indices, std::size_t patch,
                                            const std::optional<postproc::CorruptionSpec>& corruption = {},
                                            std::pair<float, float>* pixel_range = nullptr);

struct SubsetMetrics {
    std::string split;      // "test" or "test_unseen"
    std::string generator;  // generator id of the synthetic images
    std::string subset;     // "photo", "painting" or "mean"
    double auc = 0.0;         // same-category pair protocol
    double acc = 0.0;         // anchor protocol
    double ap = 0.0;          // synthetic as positive, score -S
    double anchor_auc = 0.0;  // real as positive, score S
    std::size_t queries = 0;
};

struct QueryScore {
    std::string split;
    std::size_t sample = 0;
    data::Category category = data::Category::RealPhoto;
    std::string generator;
    std::uint64_t seed = 0;
    double anchor_score = 0.0;
    std::optional<std::size_t> predicted_label;
};

struct EvalReport {
    std::vector<SubsetMetrics> rows;
    std::vector<QueryScore> scores;

    /// The "mean" row of a split; throws if absent.
    const SubsetMetrics& mean(const std::string& split) const;
};

/// Pair AUC, anchor Acc, AP per medium on the test split and, when present,
/// on test_unseen (whose synthetics are paired with the test reals).
EvalReport run_eval(const Model& model, const RunConfig& cfg, const data::Dataset& dataset,
                    bool write_outputs = true);

struct AblationRow {
    labels::LabelStrategy strategy = labels::LabelStrategy::R2;
    std::size_t steps = 0;
    double final_loss = 0.0;
    SubsetMetrics in_distribution;
    std::optional<SubsetMetrics> held_out;
    std::vector<StepRecord> trajectory;
};

std::vector<AblationRow> run_label_ablation(const RunConfig& cfg, const data::Dataset& dataset,
                                            bool write_outputs = true);

struct SweepRow {
    std::size_t anchor_size = 0;
    std::size_t repeats = 0;
    double mean_acc = 0.0;
    double std_acc = 0.0;
    double min_acc = 0.0;
    double max_acc = 0.0;
};

/// For every M, `repeats` seeded anchor draws per medium; mean and
/// population standard deviation of the medium-averaged Acc.
std::vector<SweepRow> run_anchor_sweep(const Model& model, const RunConfig& cfg,
                                       const data::Dataset& dataset, bool write_outputs = true);

struct RobustnessRow {
    std::string kind;  // "clean" or a corruption name
    double severity = 0.0;
    SubsetMetrics metrics;
    float pixel_min = 0.0f;
    float pixel_max = 0.0f;
};

/// Clean baseline plus one row per grid severity, on the test split with
/// clean anchors.
std::vector<RobustnessRow> run_robustness(const Model& model, const RunConfig& cfg,
                                          const data::Dataset& dataset, bool write_outputs = true);

struct GradCheckRow {
    std::string loss;
    double max_error = 0.0;
};

/// Central-difference checks of every training loss over `trials` random
/// small batches.
std::vector<GradCheckRow> run_grad_checks(std::uint64_t seed, std::size_t trials);

}  // namespace lasted::harness
