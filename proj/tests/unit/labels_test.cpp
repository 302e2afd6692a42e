#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "lasted/error.hpp"
#include "lasted/labels/labels.hpp"

using namespace lasted;
using namespace lasted::labels;

namespace {

const std::vector<LabelStrategy> kAll{LabelStrategy::R1, LabelStrategy::R2, LabelStrategy::R3,
                                      LabelStrategy::R4, LabelStrategy::R5};

std::set<int> token_set(const TextLabel& label, const Vocab& vocab) {
    auto ids = tokenize(label, vocab);
    return {ids.begin(), ids.end()};
}

std::size_t shared_tokens(const std::set<int>& a, const std::set<int>& b) {
    std::size_t n = 0;
    for (int t : a) n += b.count(t);
    return n;
}

}  // namespace

TEST(MakeLabel, TableStrings) {
    EXPECT_EQ(make_label(Authenticity::Real, Medium::Photo, LabelStrategy::R2).text, "Real Photo");
    EXPECT_EQ(make_label(Authenticity::Synthetic, Medium::Painting, LabelStrategy::R4).text,
              "Synthetic-Painting");
    EXPECT_EQ(make_label(Authenticity::Real, Medium::Photo, LabelStrategy::R5).text, "A B");
    EXPECT_EQ(make_label(Authenticity::Synthetic, Medium::Photo, LabelStrategy::R3).text,
              "Photo Synthetic");
    EXPECT_EQ(make_label(Authenticity::Synthetic, std::nullopt, LabelStrategy::R1).text,
              "Synthetic");
    EXPECT_EQ(make_label(Authenticity::Real, Medium::Painting, LabelStrategy::R1).text, "Real");
}

TEST(MakeLabel, MissingMediumThrows) {
    for (auto s : {LabelStrategy::R2, LabelStrategy::R3, LabelStrategy::R4, LabelStrategy::R5}) {
        EXPECT_THROW(make_label(Authenticity::Real, std::nullopt, s), ArgumentError);
    }
}

TEST(MakeLabel, InjectivePerStrategy) {
    for (auto s : kAll) {
        std::set<std::string> seen;
        std::size_t combos = 0;
        for (auto a : {Authenticity::Real, Authenticity::Synthetic}) {
            for (auto m : {Medium::Photo, Medium::Painting}) {
                seen.insert(make_label(a, m, s).text);
                ++combos;
            }
        }
        EXPECT_EQ(seen.size(), s == LabelStrategy::R1 ? 2u : combos);
    }
}

TEST(Strategy, ParseRoundTripAndUnknown) {
    for (auto s : kAll) {
        EXPECT_EQ(parse_strategy(strategy_name(s)), s);
    }
    EXPECT_THROW(parse_strategy("R9"), ArgumentError);
}

TEST(Tokenize, WhitespaceSplitAndLowercase) {
    LabelSet set(LabelStrategy::R2);
    const auto& v = set.vocab();
    EXPECT_EQ(tokenize(set[0], v), (std::vector<int>{v.id("real"), v.id("photo")}));
}

TEST(Tokenize, HyphenatedWordIsOneToken) {
    LabelSet set(LabelStrategy::R4);
    EXPECT_EQ(tokenize(set[0], set.vocab()), (std::vector<int>{set.vocab().id("real-photo")}));
}

TEST(Tokenize, SwappedOrderKeepsTokenSet) {
    LabelSet r3(LabelStrategy::R3);
    const auto& v = r3.vocab();
    EXPECT_EQ(tokenize(r3[0], v), (std::vector<int>{v.id("photo"), v.id("real")}));
    EXPECT_EQ(split_tokens("Real Photo").size(), 2u);
    auto a = split_tokens("Photo Real");
    auto b = split_tokens("Real Photo");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
}

TEST(Tokenize, UnknownTokenThrows) {
    LabelSet set(LabelStrategy::R2);
    EXPECT_THROW(tokenize({"Real Sculpture", Authenticity::Real, Medium::Photo}, set.vocab()),
                 ArgumentError);
}

TEST(BuildVocab, SizesAndOrder) {
    LabelSet r2(LabelStrategy::R2);
    EXPECT_EQ(r2.vocab().tokens(),
              (std::vector<std::string>{"real", "photo", "painting", "synthetic"}));
    LabelSet r4(LabelStrategy::R4);
    EXPECT_EQ(r4.vocab().size(), 4u);
    for (const auto& t : r4.vocab().tokens()) {
        EXPECT_NE(t.find('-'), std::string::npos);
    }
    LabelSet r5(LabelStrategy::R5);
    EXPECT_EQ(r5.vocab().tokens(), (std::vector<std::string>{"a", "b", "c", "d"}));
    EXPECT_EQ(LabelSet(LabelStrategy::R1).vocab().size(), 2u);
}

TEST(BuildVocab, IdempotentAndEmptyThrows) {
    LabelSet r2(LabelStrategy::R2);
    auto again = build_vocab(r2.labels());
    EXPECT_EQ(again.tokens(), r2.vocab().tokens());
    EXPECT_THROW(build_vocab({}), ArgumentError);
}

TEST(LabelSet, CountsAndDistinctness) {
    for (auto s : kAll) {
        LabelSet set(s);
        EXPECT_EQ(set.size(), label_count(s));
        std::set<std::string> texts;
        for (const auto& l : set.labels()) texts.insert(l.text);
        EXPECT_EQ(texts.size(), set.size());
    }
}

TEST(LabelSet, IndexOfMatchesMakeLabel) {
    for (auto s : kAll) {
        LabelSet set(s);
        for (auto a : {Authenticity::Real, Authenticity::Synthetic}) {
            for (auto m : {Medium::Photo, Medium::Painting}) {
                EXPECT_EQ(set[set.index_of(a, m)].text, make_label(a, m, s).text);
            }
        }
    }
}

// R2 and R5 tokenize to identical id sequences, i.e. they differ only by the
// token bijection real<->a, photo<->b, painting<->c, synthetic<->d.
TEST(LabelSet, R2AndR5AreRelabelings) {
    LabelSet r2(LabelStrategy::R2);
    LabelSet r5(LabelStrategy::R5);
    std::map<std::string, std::string> bijection{
        {"real", "a"}, {"photo", "b"}, {"painting", "c"}, {"synthetic", "d"}};
    for (const auto& [word, letter] : bijection) {
        EXPECT_EQ(r2.vocab().id(word), r5.vocab().id(letter));
    }
    EXPECT_EQ(r2.tokenized(), r5.tokenized());
}

TEST(LabelSet, TokenSharingStructure) {
    for (auto s : {LabelStrategy::R2, LabelStrategy::R3, LabelStrategy::R4, LabelStrategy::R5}) {
        LabelSet set(s);
        for (auto a1 : {Authenticity::Real, Authenticity::Synthetic})
            for (auto m1 : {Medium::Photo, Medium::Painting})
                for (auto a2 : {Authenticity::Real, Authenticity::Synthetic})
                    for (auto m2 : {Medium::Photo, Medium::Painting}) {
                        if (a1 == a2 && m1 == m2) continue;
                        const auto t1 = token_set(set[set.index_of(a1, m1)], set.vocab());
                        const auto t2 = token_set(set[set.index_of(a2, m2)], set.vocab());
                        const std::size_t expected =
                            s == LabelStrategy::R4 ? 0 : ((a1 == a2) + (m1 == m2));
                        EXPECT_EQ(shared_tokens(t1, t2), expected)
                            << strategy_name(s) << ' ' << set[set.index_of(a1, m1)].text << " / "
                            << set[set.index_of(a2, m2)].text;
                    }
    }
}
