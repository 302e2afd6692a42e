#include "lasted/metrics/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "lasted/error.hpp"
#include "lasted/random.hpp"

namespace lasted::metrics {

std::size_t ScoredSet::positives() const {
    return static_cast<std::size_t>(std::count(truths.begin(), truths.end(), true));
}

void ScoredSet::check() const {
    if (scores.size() != truths.size()) {
        throw ArgumentError("scored set has " + std::to_string(scores.size()) + " scores and " +
                            std::to_string(truths.size()) + " truths");
    }
}

ScoredSet sample_pairs(std::span<const identify::Vector> embeddings,
                       std::span<const std::size_t> categories, std::size_t n_pos,
                       std::size_t n_neg, std::uint64_t seed) {
    const std::size_t n = embeddings.size();
    if (categories.size() != n) {
        throw ArgumentError("sample_pairs: embeddings and categories differ in length");
    }
    std::vector<std::size_t> counts;
    for (std::size_t c : categories) {
        if (c >= counts.size()) counts.resize(c + 1, 0);
        ++counts[c];
    }
    const bool can_pos = std::any_of(counts.begin(), counts.end(), [](std::size_t k) { return k >= 2; });
    const bool can_neg = std::count_if(counts.begin(), counts.end(), [](std::size_t k) { return k > 0; }) >= 2;
    if (n_pos > 0 && !can_pos) throw ArgumentError("no category has two samples for positive pairs");
    if (n_neg > 0 && !can_neg) throw ArgumentError("negative pairs need at least two categories");

    Rng rng(seed);
    ScoredSet out;
    out.scores.reserve(n_pos + n_neg);
    out.truths.reserve(n_pos + n_neg);
    auto draw = [&](bool same) {
        while (true) {
            const std::size_t i = rng.below(n);
            const std::size_t j = rng.below(n);
            if (i == j || (categories[i] == categories[j]) != same) continue;
            out.scores.push_back(identify::same_category_score(embeddings[i], embeddings[j]));
            out.truths.push_back(same);
            return;
        }
    };
    for (std::size_t k = 0; k < n_pos; ++k) draw(true);
    for (std::size_t k = 0; k < n_neg; ++k) draw(false);
    return out;
}

double roc_auc(const ScoredSet& set) {
    set.check();
    const std::size_t n = set.size();
    const std::size_t pos = set.positives();
    const std::size_t neg = n - pos;
    if (pos == 0 || neg == 0) {
        throw ArgumentError("AUC needs at least one positive and one negative");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return set.scores[a] < set.scores[b]; });
    // Twice the mid-rank sum keeps every quantity an exact integer.
    std::uint64_t twice_rank_sum = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && set.scores[order[j]] == set.scores[order[i]]) ++j;
        const std::uint64_t twice_mid = i + j + 1;  // ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k) {
            if (set.truths[order[k]]) twice_rank_sum += twice_mid;
        }
        i = j;
    }
    const std::uint64_t twice_u = twice_rank_sum - pos * (pos + 1);
    return static_cast<double>(twice_u) / 2.0 / (static_cast<double>(pos) * static_cast<double>(neg));
}

double accuracy(const ScoredSet& set, const identify::DecisionThreshold& threshold) {
    set.check();
    if (set.size() == 0) throw ArgumentError("accuracy of an empty set");
    const double th = identify::resolve_threshold(set.scores, threshold);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        correct += (set.scores[i] >= th) == set.truths[i];
    }
    return static_cast<double>(correct) / static_cast<double>(set.size());
}

double average_precision(const ScoredSet& set) {
    set.check();
    const std::size_t pos = set.positives();
    if (pos == 0) throw ArgumentError("average precision needs at least one positive");
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return set.scores[a] > set.scores[b]; });
    double total = 0.0;
    std::size_t hits = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (set.truths[order[rank]]) {
            ++hits;
            total += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    return total / static_cast<double>(pos);
}

}  // namespace lasted::metrics
