#include "lasted/labels/labels.hpp"

#include <array>
#include <cctype>

#include "lasted/error.hpp"

namespace lasted::labels {

namespace {

// Rows follow the order (Real, Photo), (Real, Painting), (Synthetic, Photo),
// (Synthetic, Painting).
constexpr std::array<std::array<std::string_view, 4>, 4> kPairedLabels{{
    {"Real Photo", "Real Painting", "Synthetic Photo", "Synthetic Painting"},
    {"Photo Real", "Painting Real", "Photo Synthetic", "Painting Synthetic"},
    {"Real-Photo", "Real-Painting", "Synthetic-Photo", "Synthetic-Painting"},
    {"A B", "A C", "D B", "D C"},
}};

std::size_t pair_index(Authenticity a, Medium m) {
    return (a == Authenticity::Real ? 0 : 2) + (m == Medium::Photo ? 0 : 1);
}

}  // namespace

LabelStrategy parse_strategy(std::string_view name) {
    if (name == "R1") return LabelStrategy::R1;
    if (name == "R2") return LabelStrategy::R2;
    if (name == "R3") return LabelStrategy::R3;
    if (name == "R4") return LabelStrategy::R4;
    if (name == "R5") return LabelStrategy::R5;
    throw ArgumentError("unknown label strategy '" + std::string(name) +
                        "' (expected R1, R2, R3, R4 or R5)");
}

std::string_view strategy_name(LabelStrategy strategy) {
    switch (strategy) {
        case LabelStrategy::R1: return "R1";
        case LabelStrategy::R2: return "R2";
        case LabelStrategy::R3: return "R3";
        case LabelStrategy::R4: return "R4";
        case LabelStrategy::R5: return "R5";
    }
    return "?";
}

std::size_t label_count(LabelStrategy strategy) {
    return strategy == LabelStrategy::R1 ? 2 : 4;
}

TextLabel make_label(Authenticity authenticity, std::optional<Medium> medium,
                     LabelStrategy strategy) {
    if (strategy == LabelStrategy::R1) {
        return {authenticity == Authenticity::Real ? "Real" : "Synthetic", authenticity,
                std::nullopt};
    }
    if (!medium) {
        throw ArgumentError("label strategy " + std::string(strategy_name(strategy)) +
                            " requires a medium");
    }
    const auto row = static_cast<std::size_t>(strategy) - 1;
    return {std::string(kPairedLabels[row][pair_index(authenticity, *medium)]), authenticity,
            medium};
}

int Vocab::add(const std::string& token) {
    auto [it, inserted] = ids_.emplace(token, static_cast<int>(tokens_.size()));
    if (inserted) {
        tokens_.push_back(token);
    }
    return it->second;
}

int Vocab::id(const std::string& token) const {
    auto it = ids_.find(token);
    if (it == ids_.end()) {
        throw ArgumentError("token '" + token + "' is not in the label vocabulary");
    }
    return it->second;
}

std::vector<std::string> split_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

Vocab build_vocab(std::span<const TextLabel> labels) {
    if (labels.empty()) {
        throw ArgumentError("build_vocab: empty label list");
    }
    Vocab vocab;
    for (const auto& label : labels) {
        for (const auto& token : split_tokens(label.text)) {
            vocab.add(token);
        }
    }
    return vocab;
}

std::vector<int> tokenize(const TextLabel& label, const Vocab& vocab) {
    std::vector<int> ids;
    for (const auto& token : split_tokens(label.text)) {
        ids.push_back(vocab.id(token));
    }
    if (ids.empty()) {
        throw ArgumentError("label '" + label.text + "' has no tokens");
    }
    return ids;
}

LabelSet::LabelSet(LabelStrategy strategy) : strategy_(strategy) {
    if (strategy == LabelStrategy::R1) {
        labels_.push_back(make_label(Authenticity::Real, std::nullopt, strategy));
        labels_.push_back(make_label(Authenticity::Synthetic, std::nullopt, strategy));
    } else {
        for (auto a : {Authenticity::Real, Authenticity::Synthetic}) {
            for (auto m : {Medium::Photo, Medium::Painting}) {
                labels_.push_back(make_label(a, m, strategy));
            }
        }
    }
    vocab_ = build_vocab(labels_);
}

std::size_t LabelSet::index_of(Authenticity authenticity, Medium medium) const {
    if (strategy_ == LabelStrategy::R1) {
        return authenticity == Authenticity::Real ? 0 : 1;
    }
    return pair_index(authenticity, medium);
}

std::vector<std::vector<int>> LabelSet::tokenized() const {
    std::vector<std::vector<int>> out;
    out.reserve(labels_.size());
    for (const auto& label : labels_) {
        out.push_back(tokenize(label, vocab_));
    }
    return out;
}

}  // namespace lasted::labels
