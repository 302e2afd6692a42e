#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "lasted/baselines/baselines.hpp"
#include "lasted/contrastive/contrastive.hpp"
#include "lasted/encoders/encoders.hpp"
#include "lasted/harness/config.hpp"

namespace lasted::harness {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Everything a paradigm trains, plus the configuration that built it.
struct Model {
    RunConfig config;
    encoders::ImageEncoder image;
    encoders::TextEncoder text;
    contrastive::Temperature temperature;
    std::optional<baselines::ClassificationHead> head;

    /// The tensors the configured paradigm trains and persists.
    std::vector<encoders::NamedTensor> named_parameters() const;
    /// Trainable tensors, including the temperature for the lasted paradigm.
    std::vector<ad::Tensor> trainable() const;
};

/// Fresh parameters drawn from cfg.seed.
Model init_model(const RunConfig& cfg);

/// Rounds every parameter and the temperature to 32-bit precision, the
/// resolution stored on disk.
void round_to_float(Model& model);

/// Independent copy of every parameter value.
Model clone(const Model& model);

/// "LSTD", u32 version, u64 file size, config snapshot, f64 temperature,
/// tensor table (name, rank, dims, f32 data), trailing CRC32. Integers are
/// little-endian.
void save_checkpoint(const std::filesystem::path& path, const Model& model);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace lasted::harness
