#include <algorithm>
#include <cmath>

#include "csv.hpp"
#include "lasted/autodiff/grad_check.hpp"
#include "lasted/autodiff/ops.hpp"
#include "lasted/baselines/baselines.hpp"
#include "lasted/contrastive/contrastive.hpp"
#include "lasted/error.hpp"
#include "lasted/harness/experiments.hpp"
#include "lasted/random.hpp"

namespace lasted::harness {

data::Dataset prepare_dataset(const RunConfig& cfg) {
    validate(cfg);
    if (cfg.data_dir.empty()) return data::generate_dataset(toy_spec(cfg));
    return data::load_dataset(cfg.data_dir);
}

std::vector<AblationRow> run_label_ablation(const RunConfig& cfg, const data::Dataset& dataset,
                                            bool write_outputs) {
    if (cfg.ablation_strategies.empty()) throw ArgumentError("label ablation needs at least one strategy");
    if (cfg.paradigm != baselines::Paradigm::Lasted) {
        throw ArgumentError("label ablation trains the lasted paradigm");
    }
    std::vector<AblationRow> rows;
    for (auto strategy : cfg.ablation_strategies) {
        RunConfig run = cfg;
        run.labels = strategy;
        auto trained = run_train(run, dataset, false);
        const auto report = run_eval(trained.model, run, dataset, false);
        AblationRow row;
        row.strategy = strategy;
        row.steps = trained.steps.size();
        row.final_loss = trained.steps.empty() ? 0.0 : trained.steps.back().loss;
        row.in_distribution = report.mean("test");
        bool has_unseen = false;
        for (const auto& r : report.rows) has_unseen = has_unseen || r.split == "test_unseen";
        if (has_unseen) row.held_out = report.mean("test_unseen");
        row.trajectory = std::move(trained.steps);
        rows.push_back(std::move(row));
    }

    if (write_outputs) {
        detail::CsvWriter csv(std::filesystem::path(cfg.out_dir) / "ablation.csv", config_hash(cfg),
                              {"strategy", "labels", "steps", "final_loss", "auc", "acc", "ap", "unseen_auc",
                               "unseen_acc", "unseen_ap"});
        for (const auto& r : rows) {
            const labels::LabelSet set(r.strategy);
            std::string texts;
            for (const auto& l : set.labels()) texts += (texts.empty() ? "" : "|") + l.text;
            const auto opt = [&](double SubsetMetrics::*field) {
                return r.held_out ? detail::num((*r.held_out).*field) : std::string();
            };
            csv.row({std::string(labels::strategy_name(r.strategy)), texts, std::to_string(r.steps),
                     detail::num(r.final_loss), detail::num(r.in_distribution.auc),
                     detail::num(r.in_distribution.acc), detail::num(r.in_distribution.ap),
                     opt(&SubsetMetrics::auc), opt(&SubsetMetrics::acc), opt(&SubsetMetrics::ap)});
        }
        detail::CsvWriter traj(std::filesystem::path(cfg.out_dir) / "ablation_steps.csv", config_hash(cfg),
                               {"strategy", "step", "loss", "image_axis_loss", "text_axis_loss",
                                "inverse_temperature"});
        for (const auto& r : rows) {
            for (const auto& s : r.trajectory) {
                traj.row({std::string(labels::strategy_name(r.strategy)), std::to_string(s.step),
                          detail::num(s.loss), detail::num(s.image_axis), detail::num(s.text_axis),
                          detail::num(s.inverse_temperature)});
            }
        }
    }
    return rows;
}

std::vector<GradCheckRow> run_grad_checks(std::uint64_t seed, std::size_t trials) {
    std::vector<GradCheckRow> rows{{"image_axis", 0.0}, {"text_axis", 0.0}, {"total", 0.0},
                                   {"classification", 0.0}, {"image_contrastive", 0.0}};
    const ad::GradCheckOptions opts{.fd_step = 1e-5};
    for (std::size_t trial = 0; trial < trials; ++trial) {
        Rng rng(derive_seed(seed, {trial}));
        const std::size_t c = 2 + rng.below(3);                 // 2..4
        const std::size_t n = c * (2 + rng.below(8 / c - 1));   // <= 8, each label twice or more
        const std::size_t d = 4 + rng.below(13);                // 4..16
        std::vector<std::size_t> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = i % c;
        rng.shuffle(std::span<std::size_t>(y));
        auto random_tensor = [&](std::size_t rows_, std::size_t cols) {
            std::vector<double> v(rows_ * cols);
            for (auto& e : v) e = rng.normal();
            return ad::Tensor::from({rows_, cols}, std::move(v));
        };
        auto temp = contrastive::Temperature::from_inverse(rng.uniform(1.0, 20.0));
        std::vector<ad::Tensor> params{random_tensor(n, d), random_tensor(c, d), temp.log_inverse};
        auto embed = [&](const ad::Tensor& raw, encoders::EmbeddingSource src) {
            return encoders::EmbeddingBatch{ad::l2_normalize(raw, 1), src};
        };
        const auto img = [&] { return embed(params[0], encoders::EmbeddingSource::Image); };
        const auto txt = [&] { return embed(params[1], encoders::EmbeddingSource::Text); };
        const contrastive::Temperature t{params[2]};

        auto record = [&](std::size_t k, const std::function<ad::Tensor()>& fn, std::span<ad::Tensor> p) {
            rows[k].max_error = std::max(rows[k].max_error, ad::grad_check(fn, p, opts));
        };
        record(0, [&] { return contrastive::image_axis_loss(img(), y, txt(), t); }, params);
        record(1, [&] { return contrastive::text_axis_loss(img(), y, txt(), t); }, params);
        record(2, [&] { return contrastive::total_loss(img(), y, txt(), t).total; }, params);

        auto head = baselines::init_classification_head(rng.next(), d, c);
        std::vector<ad::Tensor> cls{params[0], head.weight, head.bias};
        record(3, [&] { return baselines::classification_loss(img(), y, head); }, cls);
        std::vector<ad::Tensor> tri{params[0]};
        record(4, [&] { return baselines::image_contrastive_loss(img(), y); }, tri);
    }
    return rows;
}

}  // namespace lasted::harness
