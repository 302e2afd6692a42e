#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lasted/identify/identify.hpp"

namespace lasted::metrics {

/// Scores with parallel binary ground truth (true = positive).
struct ScoredSet {
    std::vector<double> scores;
    std::vector<bool> truths;

    std::size_t size() const { return scores.size(); }
    std::size_t positives() const;
    /// Throws ArgumentError when the lengths differ.
    void check() const;
};

/// n_pos same-category and n_neg cross-category pairs, each drawn uniformly
/// with replacement from the ordered pairs of distinct samples, scored by
/// cosine. Same-category pairs are the positives.
ScoredSet sample_pairs(std::span<const identify::Vector> embeddings,
                       std::span<const std::size_t> categories, std::size_t n_pos,
                       std::size_t n_neg, std::uint64_t seed);

/// Mann-Whitney statistic via mid-rank sums; ties count one half.
double roc_auc(const ScoredSet& set);

/// Fraction of (score >= threshold) decisions that agree with the truth.
double accuracy(const ScoredSet& set, const identify::DecisionThreshold& threshold);

/// Non-interpolated AP: mean precision at the rank of each positive, with
/// scores sorted descending and ties kept in input order.
double average_precision(const ScoredSet& set);

}  // namespace lasted::metrics
