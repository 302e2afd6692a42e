#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lasted/encoders/encoders.hpp"

namespace lasted::identify {

using Vector = std::vector<double>;

/// Copies the rows of a batch out of the autodiff graph.
std::vector<Vector> to_rows(const encoders::EmbeddingBatch& batch);

/// Reference images of one category, summarized by the mean of their
/// (unit) embeddings. The mean is stored as is, not renormalized.
struct AnchorSet {
    std::string tag;
    std::size_t size = 0;
    Vector representation;
};

AnchorSet build_anchor(std::span<const Vector> members, std::string tag);
AnchorSet build_anchor(const encoders::EmbeddingBatch& members, std::string tag);

/// Cosine of the angle between a and b. Throws ArgumentError for zero norms
/// or mismatched lengths.
double cosine(std::span<const double> a, std::span<const double> b);
double similarity(std::span<const double> query, const AnchorSet& anchor);
/// Anchor-free pair score.
double same_category_score(std::span<const double> a, std::span<const double> b);

struct DecisionThreshold {
    enum class Mode { Median, Fixed };
    Mode mode = Mode::Median;
    double value = 0.0;

    static DecisionThreshold median() { return {}; }
    static DecisionThreshold fixed(double value);
    /// "median" or "fixed:<v>" with v in [-1, 1].
    static DecisionThreshold parse(std::string_view text);
    std::string str() const;
};

/// The threshold applied to `scores`. Median mode takes the value at
/// position floor(n/2) of the ascending order, so with an even count exactly
/// the upper half (plus ties with it) passes.
double resolve_threshold(std::span<const double> scores, const DecisionThreshold& threshold);

enum class Decision { SameCategory, DifferentCategory };

/// SameCategory iff score >= threshold.
std::vector<Decision> classify(std::span<const double> scores, const DecisionThreshold& threshold);

/// Index of the label row with the highest cosine to `query`; ties go to
/// the lowest index.
std::size_t predict_label_text(std::span<const double> query,
                               const encoders::EmbeddingBatch& label_embeddings);
std::size_t predict_label_text(std::span<const double> query, std::span<const Vector> label_rows);

/// M distinct indices drawn from [0, pool_size) by a seeded partial shuffle.
std::vector<std::size_t> sample_anchor_indices(std::size_t pool_size, std::size_t m,
                                               std::uint64_t seed);

}  // namespace lasted::identify
