#include <algorithm>
#include <cmath>
#include <limits>

#include "csv.hpp"
#include "lasted/error.hpp"
#include "lasted/harness/experiments.hpp"
#include "lasted/metrics/metrics.hpp"
#include "lasted/random.hpp"

namespace lasted::harness {

namespace {

constexpr std::uint64_t kPairStream = 0x9a1e;
constexpr std::uint64_t kSweepStream = 0x5eeb;
constexpr std::uint64_t kNoiseStream = 0x0153;
constexpr std::size_t kEmbedChunk = 64;

constexpr std::array<labels::Medium, 2> kMedia{labels::Medium::Photo, labels::Medium::Painting};

std::string medium_name(labels::Medium m) { return m == labels::Medium::Photo ? "photo" : "painting"; }

encoders::ImageEncoder frozen(const encoders::ImageEncoder& enc) {
    encoders::ImageEncoder out = enc;
    for (auto& b : out.blocks) {
        b.weight = b.weight.detach();
        b.bias = b.bias.detach();
    }
    out.head_weight = enc.head_weight.detach();
    out.head_bias = enc.head_bias.detach();
    return out;
}

std::vector<std::size_t> select(const data::Corpus& corpus, labels::Authenticity a, labels::Medium m) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
        if (corpus.samples[i].authenticity == a && corpus.samples[i].medium == m) out.push_back(i);
    }
    return out;
}

// Queries of one medium: test reals followed by the split's synthetics.
struct MediumQueries {
    labels::Medium medium;
    const data::Corpus* synth_corpus = nullptr;
    std::vector<std::size_t> real_idx;
    std::vector<std::size_t> synth_idx;
    std::vector<identify::Vector> rows;  // reals then synthetics
    std::vector<std::size_t> truth;      // 0 real, 1 synthetic
};

struct AnchorPool {
    labels::Medium medium;
    std::vector<std::size_t> idx;
    std::vector<identify::Vector> rows;  // filled lazily
};

std::vector<identify::Vector> gather_rows(const std::vector<identify::Vector>& rows,
                                          const std::vector<std::size_t>& pick) {
    std::vector<identify::Vector> out;
    out.reserve(pick.size());
    for (std::size_t i : pick) out.push_back(rows[i]);
    return out;
}

struct Scored {
    SubsetMetrics metrics;
    std::vector<double> scores;
};

Scored score_subset(const MediumQueries& q, const identify::AnchorSet& anchor, const RunConfig& cfg,
                    std::uint64_t pair_seed) {
    Scored out;
    const auto pairs = metrics::sample_pairs(q.rows, q.truth, cfg.n_pos, cfg.n_neg, pair_seed);
    out.metrics.auc = metrics::roc_auc(pairs);
    metrics::ScoredSet real_first;
    metrics::ScoredSet synth_first;
    for (std::size_t i = 0; i < q.rows.size(); ++i) {
        const double s = identify::similarity(q.rows[i], anchor);
        out.scores.push_back(s);
        real_first.scores.push_back(s);
        real_first.truths.push_back(q.truth[i] == 0);
        synth_first.scores.push_back(-s);
        synth_first.truths.push_back(q.truth[i] == 1);
    }
    out.metrics.acc = metrics::accuracy(real_first, cfg.threshold);
    out.metrics.anchor_auc = metrics::roc_auc(real_first);
    out.metrics.ap = metrics::average_precision(synth_first);
    out.metrics.subset = medium_name(q.medium);
    out.metrics.queries = q.rows.size();
    return out;
}

SubsetMetrics mean_row(const std::vector<SubsetMetrics>& rows) {
    SubsetMetrics m;
    if (rows.empty()) return m;
    m.split = rows[0].split;
    m.generator = rows[0].generator;
    m.subset = "mean";
    for (const auto& r : rows) {
        m.auc += r.auc / rows.size();
        m.acc += r.acc / rows.size();
        m.ap += r.ap / rows.size();
        m.anchor_auc += r.anchor_auc / rows.size();
        m.queries += r.queries;
    }
    return m;
}

data::Corpus load_anchor_corpus(const RunConfig& cfg, const data::Dataset& dataset, bool& owned,
                                data::Corpus& storage) {
    owned = !cfg.anchor_dir.empty();
    if (owned) storage = data::load_corpus(cfg.anchor_dir);
    return owned ? storage : dataset.train;
}

// Builds the per-medium query sets of `split`. Media lacking reals or
// synthetics are skipped.
std::vector<MediumQueries> build_queries(const Model& model, const RunConfig& cfg,
                                         const data::Dataset& dataset, data::Split split,
                                         const std::optional<postproc::CorruptionSpec>& corruption = {},
                                         std::pair<float, float>* range = nullptr) {
    std::vector<MediumQueries> out;
    const data::Corpus& synth_corpus = dataset.split(split);
    for (auto m : kMedia) {
        MediumQueries q{m, &synth_corpus, select(dataset.test, labels::Authenticity::Real, m),
                        select(synth_corpus, labels::Authenticity::Synthetic, m), {}, {}};
        if (q.real_idx.size() < 2 || q.synth_idx.size() < 2) continue;
        std::pair<float, float> r1{1.0f, 0.0f}, r2{1.0f, 0.0f};
        q.rows = embed_samples(model, dataset.test, q.real_idx, cfg.patch, corruption, &r1);
        auto synth_rows = embed_samples(model, synth_corpus, q.synth_idx, cfg.patch, corruption, &r2);
        if (range) {
            range->first = std::min({range->first, r1.first, r2.first});
            range->second = std::max({range->second, r1.second, r2.second});
        }
        for (auto& r : synth_rows) q.rows.push_back(std::move(r));
        q.truth.assign(q.real_idx.size(), 0);
        q.truth.resize(q.rows.size(), 1);
        out.push_back(std::move(q));
    }
    return out;
}

std::string generator_of(const MediumQueries& q) {
    return q.synth_corpus->samples[q.synth_idx.front()].generator_id;
}

std::uint64_t pair_seed(const RunConfig& cfg, data::Split split, labels::Medium m) {
    return derive_seed(cfg.seed, {kPairStream, static_cast<std::uint64_t>(split), static_cast<std::uint64_t>(m)});
}

std::uint64_t anchor_seed(const RunConfig& cfg, labels::Medium m) {
    return derive_seed(cfg.anchor_seed, {static_cast<std::uint64_t>(m)});
}

identify::AnchorSet draw_anchor(const Model& model, const RunConfig& cfg, const data::Corpus& pool_corpus,
                                labels::Medium m, std::size_t size, std::uint64_t seed) {
    const auto pool = select(pool_corpus, labels::Authenticity::Real, m);
    if (pool.empty()) throw DataError("anchor pool empty for real " + medium_name(m));
    const auto pick = identify::sample_anchor_indices(pool.size(), size, seed);
    std::vector<std::size_t> chosen;
    for (std::size_t i : pick) chosen.push_back(pool[i]);
    const auto rows = embed_samples(model, pool_corpus, chosen, cfg.patch);
    return identify::build_anchor(rows, "real " + medium_name(m));
}

}  // namespace

std::vector<identify::Vector> embed_samples(const Model& model, const data::Corpus& corpus,
                                            std::span<const std::size_t> indices, std::size_t patch,
                                            const std::optional<postproc::CorruptionSpec>& corruption,
                                            std::pair<float, float>* pixel_range) {
    const auto enc = frozen(model.image);
    std::vector<identify::Vector> out;
    out.reserve(indices.size());
    const std::size_t per = 3 * patch * patch;
    for (std::size_t start = 0; start < indices.size(); start += kEmbedChunk) {
        const std::size_t n = std::min(kEmbedChunk, indices.size() - start);
        std::vector<double> values(n * per);
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t idx = indices[start + k];
            Image img = data::center_crop_eval(corpus.samples[idx], patch);
            if (corruption) {
                auto spec = *corruption;
                spec.seed = derive_seed(spec.seed, {idx});
                img = postproc::apply(img, spec);
                if (img.height != patch || img.width != patch) {
                    img = postproc::resize_bilinear(img, patch, patch);
                }
            }
            if (img.channels != 3) throw ShapeError("expected 3-channel images");
            if (pixel_range) {
                const auto [lo, hi] = std::minmax_element(img.pixels.begin(), img.pixels.end());
                pixel_range->first = std::min(pixel_range->first, *lo);
                pixel_range->second = std::max(pixel_range->second, *hi);
            }
            std::copy(img.pixels.begin(), img.pixels.end(), values.begin() + static_cast<std::ptrdiff_t>(k * per));
        }
        const auto batch = encoders::encode_image(ad::Tensor::from({n, 3, patch, patch}, std::move(values)), enc);
        for (auto& r : identify::to_rows(batch)) out.push_back(std::move(r));
    }
    return out;
}

const SubsetMetrics& EvalReport::mean(const std::string& split) const {
    for (const auto& r : rows) {
        if (r.split == split && r.subset == "mean") return r;
    }
    throw ArgumentError("no evaluation rows for split '" + split + "'");
}

EvalReport run_eval(const Model& model, const RunConfig& cfg, const data::Dataset& dataset,
                    bool write_outputs) {
    validate(cfg);
    if (cfg.predict_labels && model.config.paradigm != baselines::Paradigm::Lasted) {
        throw ArgumentError("label prediction needs a model trained with the lasted paradigm");
    }
    bool owned = false;
    data::Corpus storage;
    const data::Corpus anchors_from = load_anchor_corpus(cfg, dataset, owned, storage);

    std::vector<identify::Vector> label_rows;
    const labels::LabelSet set(model.config.labels);
    if (cfg.predict_labels) {
        encoders::TextEncoder text = model.text;
        text.embedding = text.embedding.detach();
        text.head_weight = text.head_weight.detach();
        text.head_bias = text.head_bias.detach();
        label_rows = identify::to_rows(encoders::encode_tokens(set.tokenized(), text));
    }

    EvalReport report;
    std::vector<identify::AnchorSet> anchors;
    for (auto m : kMedia) {
        anchors.push_back(draw_anchor(model, cfg, anchors_from, m, cfg.anchor_size, anchor_seed(cfg, m)));
    }
    for (data::Split split : {data::Split::Test, data::Split::TestUnseen}) {
        if (dataset.split(split).samples.empty()) continue;
        const auto queries = build_queries(model, cfg, dataset, split);
        std::vector<SubsetMetrics> rows;
        for (const auto& q : queries) {
            const auto& anchor = anchors[q.medium == labels::Medium::Photo ? 0 : 1];
            auto scored = score_subset(q, anchor, cfg, pair_seed(cfg, split, q.medium));
            scored.metrics.split = data::split_name(split);
            scored.metrics.generator = generator_of(q);
            rows.push_back(scored.metrics);
            for (std::size_t i = 0; i < q.rows.size(); ++i) {
                const bool real = q.truth[i] == 0;
                const data::Corpus& c = real ? dataset.test : *q.synth_corpus;
                const std::size_t idx = real ? q.real_idx[i] : q.synth_idx[i - q.real_idx.size()];
                QueryScore qs{data::split_name(split), idx, c.samples[idx].category(),
                              c.samples[idx].generator_id, c.samples[idx].seed, scored.scores[i], std::nullopt};
                if (cfg.predict_labels) qs.predicted_label = identify::predict_label_text(q.rows[i], label_rows);
                report.scores.push_back(std::move(qs));
            }
        }
        if (rows.empty()) {
            if (split == data::Split::Test) throw DataError("test split needs real and synthetic images of some medium");
            continue;
        }
        const auto mean = mean_row(rows);
        for (auto& r : rows) report.rows.push_back(r);
        report.rows.push_back(mean);
    }

    if (write_outputs) {
        const std::filesystem::path out_dir(cfg.out_dir);
        const std::string hash = config_hash(cfg);
        detail::CsvWriter eval(out_dir / "eval.csv", hash,
                               {"paradigm", "labels", "split", "generator", "subset", "auc", "acc", "ap",
                                "anchor_auc", "queries", "anchor_size", "threshold"});
        for (const auto& r : report.rows) {
            eval.row({baselines::paradigm_name(model.config.paradigm),
                      std::string(labels::strategy_name(model.config.labels)), r.split, r.generator, r.subset,
                      detail::num(r.auc), detail::num(r.acc), detail::num(r.ap), detail::num(r.anchor_auc),
                      std::to_string(r.queries), std::to_string(cfg.anchor_size), cfg.threshold.str()});
        }
        detail::CsvWriter scores(out_dir / "scores.csv", hash,
                                 {"split", "sample", "category", "generator", "seed", "anchor_score",
                                  "predicted_label", "predicted_text"});
        for (const auto& s : report.scores) {
            scores.row({s.split, std::to_string(s.sample), data::category_dir(s.category), s.generator,
                        std::to_string(s.seed), detail::num(s.anchor_score),
                        s.predicted_label ? std::to_string(*s.predicted_label) : "",
                        s.predicted_label ? set[*s.predicted_label].text : ""});
        }
    }
    return report;
}

std::vector<SweepRow> run_anchor_sweep(const Model& model, const RunConfig& cfg, const data::Dataset& dataset,
                                       bool write_outputs) {
    validate(cfg);
    if (cfg.sweep_sizes.empty() || cfg.sweep_repeats == 0) {
        throw ArgumentError("anchor sweep needs at least one size and one repeat");
    }
    const data::Split split =
        dataset.split(cfg.sweep_split).samples.empty() ? data::Split::Test : cfg.sweep_split;
    bool owned = false;
    data::Corpus storage;
    const data::Corpus anchors_from = load_anchor_corpus(cfg, dataset, owned, storage);
    const auto queries = build_queries(model, cfg, dataset, split);
    if (queries.empty()) throw DataError("sweep split has no medium with real and synthetic images");

    std::vector<AnchorPool> pools;
    const std::size_t largest = *std::max_element(cfg.sweep_sizes.begin(), cfg.sweep_sizes.end());
    for (const auto& q : queries) {
        AnchorPool pool{q.medium, select(anchors_from, labels::Authenticity::Real, q.medium), {}};
        if (pool.idx.size() < largest || largest == 0) {
            throw ArgumentError("anchor pool of " + std::to_string(pool.idx.size()) + " real " +
                                medium_name(q.medium) + " images is too small for M=" + std::to_string(largest));
        }
        pool.rows = embed_samples(model, anchors_from, pool.idx, cfg.patch);
        pools.push_back(std::move(pool));
    }

    std::vector<SweepRow> rows;
    for (std::size_t m : cfg.sweep_sizes) {
        std::vector<double> accs;
        for (std::size_t r = 0; r < cfg.sweep_repeats; ++r) {
            double acc = 0.0;
            for (std::size_t k = 0; k < queries.size(); ++k) {
                const auto& q = queries[k];
                const auto pick = identify::sample_anchor_indices(
                    pools[k].rows.size(), m,
                    derive_seed(cfg.anchor_seed, {kSweepStream, m, r, static_cast<std::uint64_t>(q.medium)}));
                const auto anchor = identify::build_anchor(gather_rows(pools[k].rows, pick), "sweep");
                metrics::ScoredSet s;
                for (std::size_t i = 0; i < q.rows.size(); ++i) {
                    s.scores.push_back(identify::similarity(q.rows[i], anchor));
                    s.truths.push_back(q.truth[i] == 0);
                }
                acc += metrics::accuracy(s, cfg.threshold) / static_cast<double>(queries.size());
            }
            accs.push_back(acc);
        }
        SweepRow row{m, accs.size(), 0.0, 0.0, *std::min_element(accs.begin(), accs.end()),
                     *std::max_element(accs.begin(), accs.end())};
        for (double a : accs) row.mean_acc += a / static_cast<double>(accs.size());
        double var = 0.0;
        for (double a : accs) var += (a - row.mean_acc) * (a - row.mean_acc) / static_cast<double>(accs.size());
        row.std_acc = std::sqrt(var);
        rows.push_back(row);
    }

    if (write_outputs) {
        detail::CsvWriter csv(std::filesystem::path(cfg.out_dir) / "anchor_sweep.csv", config_hash(cfg),
                              {"split", "anchor_size", "repeats", "mean_acc", "std_acc", "min_acc", "max_acc"});
        for (const auto& r : rows) {
            csv.row({data::split_name(split), std::to_string(r.anchor_size), std::to_string(r.repeats),
                     detail::num(r.mean_acc), detail::num(r.std_acc), detail::num(r.min_acc),
                     detail::num(r.max_acc)});
        }
    }
    return rows;
}

std::vector<RobustnessRow> run_robustness(const Model& model, const RunConfig& cfg, const data::Dataset& dataset,
                                          bool write_outputs) {
    validate(cfg);
    using postproc::CorruptionKind;
    std::vector<postproc::CorruptionSpec> grid;
    const std::uint64_t noise_seed = derive_seed(cfg.seed, {kNoiseStream});
    auto add = [&](CorruptionKind kind, const std::vector<double>& severities) {
        for (double s : severities) {
            postproc::CorruptionSpec spec{kind, s, noise_seed};
            postproc::validate(spec);
            if (kind == CorruptionKind::Downsample && cfg.patch % static_cast<std::size_t>(s) != 0) {
                throw ArgumentError("patch " + std::to_string(cfg.patch) + " not divisible by downsample factor");
            }
            grid.push_back(spec);
        }
    };
    add(CorruptionKind::JpegLike, cfg.jpeg_grid);
    add(CorruptionKind::GaussianBlur, cfg.blur_grid);
    add(CorruptionKind::GaussianNoise, cfg.noise_grid);
    add(CorruptionKind::Downsample, cfg.downsample_grid);

    bool owned = false;
    data::Corpus storage;
    const data::Corpus anchors_from = load_anchor_corpus(cfg, dataset, owned, storage);
    std::vector<identify::AnchorSet> anchors;
    for (auto m : kMedia) {
        anchors.push_back(draw_anchor(model, cfg, anchors_from, m, cfg.anchor_size, anchor_seed(cfg, m)));
    }

    auto evaluate = [&](const std::optional<postproc::CorruptionSpec>& spec) {
        RobustnessRow row;
        std::pair<float, float> range{std::numeric_limits<float>::max(), std::numeric_limits<float>::lowest()};
        const auto queries = build_queries(model, cfg, dataset, data::Split::Test, spec, &range);
        if (queries.empty()) throw DataError("test split needs real and synthetic images of some medium");
        std::vector<SubsetMetrics> rows;
        for (const auto& q : queries) {
            const auto& anchor = anchors[q.medium == labels::Medium::Photo ? 0 : 1];
            auto scored = score_subset(q, anchor, cfg, pair_seed(cfg, data::Split::Test, q.medium));
            scored.metrics.split = data::split_name(data::Split::Test);
            scored.metrics.generator = generator_of(q);
            rows.push_back(scored.metrics);
        }
        row.metrics = mean_row(rows);
        row.kind = spec ? postproc::corruption_name(spec->kind) : "clean";
        row.severity = spec ? spec->severity : 0.0;
        row.pixel_min = range.first;
        row.pixel_max = range.second;
        return row;
    };

    std::vector<RobustnessRow> rows{evaluate(std::nullopt)};
    for (const auto& spec : grid) rows.push_back(evaluate(spec));

    if (write_outputs) {
        detail::CsvWriter csv(std::filesystem::path(cfg.out_dir) / "robustness.csv", config_hash(cfg),
                              {"kind", "severity", "auc", "acc", "ap", "anchor_auc", "pixel_min", "pixel_max"});
        for (const auto& r : rows) {
            csv.row({r.kind, r.kind == "clean" ? "" : detail::num(r.severity), detail::num(r.metrics.auc),
                     detail::num(r.metrics.acc), detail::num(r.metrics.ap), detail::num(r.metrics.anchor_auc),
                     detail::num(r.pixel_min), detail::num(r.pixel_max)});
        }
    }
    return rows;
}

}  // namespace lasted::harness
