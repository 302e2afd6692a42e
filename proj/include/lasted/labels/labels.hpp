#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lasted::labels {

enum class Authenticity { Real, Synthetic };
enum class Medium { Photo, Painting };

/// Textual labeling schemes. R1 uses authenticity only; R2..R5 pair it with
/// the medium using plain words, swapped order, hyphenation and letters.
enum class LabelStrategy { R1, R2, R3, R4, R5 };

LabelStrategy parse_strategy(std::string_view name);
std::string_view strategy_name(LabelStrategy strategy);
std::size_t label_count(LabelStrategy strategy);

struct TextLabel {
    std::string text;
    Authenticity authenticity = Authenticity::Real;
    std::optional<Medium> medium;

    bool operator==(const TextLabel&) const = default;
};

/// The exact label string for a category under `strategy`. The medium is
/// ignored by R1 and required by every other strategy.
TextLabel make_label(Authenticity authenticity, std::optional<Medium> medium,
                     LabelStrategy strategy);

/// Closed token vocabulary with ids assigned in first-appearance order.
class Vocab {
public:
    /// Returns the id of `token`, adding it when unseen.
    int add(const std::string& token);
    /// Throws ArgumentError for tokens outside the vocabulary.
    int id(const std::string& token) const;
    bool contains(const std::string& token) const { return ids_.count(token) != 0; }
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    std::map<std::string, int> ids_;
    std::vector<std::string> tokens_;
};

/// Lowercased, whitespace-separated words. Hyphens are kept inside tokens.
std::vector<std::string> split_tokens(std::string_view text);

Vocab build_vocab(std::span<const TextLabel> labels);
std::vector<int> tokenize(const TextLabel& label, const Vocab& vocab);

/// The C predefined labels of one strategy plus their vocabulary.
class LabelSet {
public:
    explicit LabelSet(LabelStrategy strategy);

    LabelStrategy strategy() const { return strategy_; }
    std::size_t size() const { return labels_.size(); }
    const std::vector<TextLabel>& labels() const { return labels_; }
    const TextLabel& operator[](std::size_t i) const { return labels_[i]; }
    const Vocab& vocab() const { return vocab_; }

    /// Index of the label a sample with this ground truth is paired with.
    std::size_t index_of(Authenticity authenticity, Medium medium) const;
    /// Token ids of every label, in label order.
    std::vector<std::vector<int>> tokenized() const;

private:
    LabelStrategy strategy_;
    std::vector<TextLabel> labels_;
    Vocab vocab_;
};

}  // namespace lasted::labels
