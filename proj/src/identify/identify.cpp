#include "lasted/identify/identify.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "lasted/error.hpp"
#include "lasted/random.hpp"

namespace lasted::identify {

std::vector<Vector> to_rows(const encoders::EmbeddingBatch& batch) {
    std::vector<Vector> rows(batch.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = batch.row(i);
        rows[i].assign(r.begin(), r.end());
    }
    return rows;
}

AnchorSet build_anchor(std::span<const Vector> members, std::string tag) {
    if (members.empty()) {
        throw ArgumentError("anchor set '" + tag + "' has no members");
    }
    const std::size_t d = members[0].size();
    AnchorSet anchor{std::move(tag), members.size(), Vector(d, 0.0)};
    for (const auto& m : members) {
        if (m.size() != d) throw ShapeError("anchor members differ in dimension");
    }
    // Each coordinate is summed in sorted order so the mean does not depend
    // on member order, bit for bit.
    std::vector<double> column(members.size());
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t i = 0; i < members.size(); ++i) column[i] = members[i][k];
        std::sort(column.begin(), column.end());
        double sum = 0.0;
        for (double v : column) sum += v;
        anchor.representation[k] = sum / static_cast<double>(members.size());
    }
    return anchor;
}

AnchorSet build_anchor(const encoders::EmbeddingBatch& members, std::string tag) {
    const auto rows = to_rows(members);
    return build_anchor(rows, std::move(tag));
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ShapeError("cosine of vectors of length " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
    }
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        ab += a[k] * b[k];
        aa += a[k] * a[k];
        bb += b[k] * b[k];
    }
    if (aa == 0.0 || bb == 0.0) {
        throw ArgumentError("cosine of a zero-norm vector");
    }
    return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

double similarity(std::span<const double> query, const AnchorSet& anchor) {
    return cosine(query, anchor.representation);
}

double same_category_score(std::span<const double> a, std::span<const double> b) {
    return cosine(a, b);
}

DecisionThreshold DecisionThreshold::fixed(double value) {
    if (!(value >= -1.0 && value <= 1.0)) {
        throw ArgumentError("fixed threshold must lie in [-1, 1]");
    }
    return {Mode::Fixed, value};
}

DecisionThreshold DecisionThreshold::parse(std::string_view text) {
    if (text == "median") return median();
    constexpr std::string_view prefix = "fixed:";
    if (text.starts_with(prefix)) {
        const auto body = text.substr(prefix.size());
        double v = 0.0;
        const auto [end, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
        if (ec == std::errc{} && end == body.data() + body.size()) return fixed(v);
    }
    throw ArgumentError("threshold must be 'median' or 'fixed:<value>', got '" +
                        std::string(text) + "'");
}

std::string DecisionThreshold::str() const {
    return mode == Mode::Median ? "median" : "fixed:" + std::to_string(value);
}

double resolve_threshold(std::span<const double> scores, const DecisionThreshold& threshold) {
    if (threshold.mode == DecisionThreshold::Mode::Fixed) return threshold.value;
    if (scores.empty()) throw ArgumentError("median threshold of an empty score set");
    std::vector<double> sorted(scores.begin(), scores.end());
    const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    return *mid;
}

std::vector<Decision> classify(std::span<const double> scores, const DecisionThreshold& threshold) {
    const double th = resolve_threshold(scores, threshold);
    std::vector<Decision> out;
    out.reserve(scores.size());
    for (double s : scores) {
        out.push_back(s >= th ? Decision::SameCategory : Decision::DifferentCategory);
    }
    return out;
}

std::size_t predict_label_text(std::span<const double> query, std::span<const Vector> label_rows) {
    if (label_rows.empty()) throw ArgumentError("no label embeddings");
    std::size_t best = 0;
    double best_score = cosine(query, label_rows[0]);
    for (std::size_t j = 1; j < label_rows.size(); ++j) {
        const double s = cosine(query, label_rows[j]);
        if (s > best_score) {
            best = j;
            best_score = s;
        }
    }
    return best;
}

std::size_t predict_label_text(std::span<const double> query,
                               const encoders::EmbeddingBatch& label_embeddings) {
    const auto rows = to_rows(label_embeddings);
    return predict_label_text(query, rows);
}

std::vector<std::size_t> sample_anchor_indices(std::size_t pool_size, std::size_t m,
                                               std::uint64_t seed) {
    if (m == 0 || m > pool_size) {
        throw ArgumentError("cannot draw " + std::to_string(m) + " anchors from a pool of " +
                            std::to_string(pool_size));
    }
    std::vector<std::size_t> idx(pool_size);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (std::size_t i = 0; i < m; ++i) {
        std::swap(idx[i], idx[i + rng.below(pool_size - i)]);
    }
    idx.resize(m);
    return idx;
}

}  // namespace lasted::identify
