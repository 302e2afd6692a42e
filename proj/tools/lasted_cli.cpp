// Command-line front end for the experiment drivers.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lasted/error.hpp"
#include "lasted/harness/checkpoint.hpp"
#include "lasted/harness/config.hpp"
#include "lasted/harness/experiments.hpp"

namespace {

using namespace lasted;
using namespace lasted::harness;

struct SharedFlags {
    std::string config;
    std::vector<std::string> sets;
    std::optional<std::string> seed, out_dir, labels, paradigm, anchor_size, anchor_dir, anchor_seed, threshold,
        data_dir;
};

void add_shared(CLI::App* cmd, SharedFlags& f) {
    cmd->add_option("--config", f.config, "key = value config file");
    cmd->add_option("--set", f.sets, "override one config key, e.g. --set epochs=5");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--out-dir", f.out_dir, "output directory");
    cmd->add_option("--data-dir", f.data_dir, "corpus root (default: generated toy corpus)");
    cmd->add_option("--labels", f.labels, "label strategy R1..R5");
    cmd->add_option("--paradigm", f.paradigm, "lasted | classification | image_contrastive");
    cmd->add_option("--anchor-size", f.anchor_size, "anchor set size M");
    cmd->add_option("--anchor-dir", f.anchor_dir, "corpus supplying the anchor pool");
    cmd->add_option("--anchor-seed", f.anchor_seed, "seed of the anchor draw");
    cmd->add_option("--threshold", f.threshold, "median | fixed:<v>");
}

// Base values (defaults or a checkpoint snapshot), then the config file,
// then --set pairs, then the named flags.
RunConfig resolve(const SharedFlags& f, RunConfig cfg) {
    if (!f.config.empty()) apply_file(cfg, f.config);
    for (const auto& kv : f.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ArgumentError("--set expects key=value, got '" + kv + "'");
        apply_text(cfg, kv.substr(0, eq) + " = " + kv.substr(eq + 1));
    }
    const std::pair<const std::optional<std::string>*, const char*> named[] = {
        {&f.seed, "seed"},           {&f.out_dir, "out_dir"},         {&f.data_dir, "data_dir"},
        {&f.labels, "labels"},       {&f.paradigm, "paradigm"},       {&f.anchor_size, "anchor_size"},
        {&f.anchor_dir, "anchor_dir"}, {&f.anchor_seed, "anchor_seed"}, {&f.threshold, "threshold"}};
    for (const auto& [value, key] : named) {
        if (*value) set_value(cfg, key, **value);
    }
    validate(cfg);
    return cfg;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

void print_metrics(const SubsetMetrics& m) {
    std::cout << m.split << ' ' << m.subset << " generator=" << m.generator << " auc=" << fmt(m.auc)
              << " acc=" << fmt(m.acc) << " ap=" << fmt(m.ap) << " n=" << m.queries << '\n';
}

// A checkpoint's own configuration with the command-line overrides on top.
Model load_for_eval(const std::string& checkpoint, const SharedFlags& f, RunConfig& cfg) {
    Model model = load_checkpoint(checkpoint);
    RunConfig base = model.config;
    base.out_dir = "out";
    cfg = resolve(f, base);
    return model;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Label-supervised synthetic image detection experiments"};
    app.require_subcommand(1);

    SharedFlags flags;
    std::string checkpoint = "out/model.lstd";
    std::size_t trials = 20;
    std::uint64_t check_seed = 0;

    auto* gen = app.add_subcommand("gen-data", "write the toy corpus as PPM files");
    auto* train = app.add_subcommand("train", "train a model; writes model.lstd and train_log.csv");
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint; writes eval.csv and scores.csv");
    auto* ablate = app.add_subcommand("ablate-labels", "train and evaluate every label strategy");
    auto* sweep = app.add_subcommand("anchor-sweep", "accuracy over anchor sizes and draws");
    auto* robust = app.add_subcommand("robustness", "metrics under post-processing");
    auto* grad = app.add_subcommand("grad-check", "finite-difference check of every training loss");
    for (auto* cmd : {gen, train, eval, ablate, sweep, robust, grad}) add_shared(cmd, flags);
    for (auto* cmd : {eval, sweep, robust}) {
        cmd->add_option("--checkpoint", checkpoint, "model checkpoint")->capture_default_str();
    }
    eval->add_flag("--predict-labels", "also emit the text-encoder label prediction per image");
    grad->add_option("--trials", trials, "random batches")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const auto cfg = resolve(flags, RunConfig{});
            const auto dataset = prepare_dataset(cfg);
            data::write_dataset(cfg.out_dir, dataset);
            std::cout << "wrote corpus to " << cfg.out_dir << '\n';
        } else if (train->parsed()) {
            const auto cfg = resolve(flags, RunConfig{});
            const auto dataset = prepare_dataset(cfg);
            const auto result = run_train(cfg, dataset, true, [](const EpochRecord& e) {
                std::cerr << "epoch " << e.epoch << " steps=" << e.steps << " loss=" << fmt(e.loss)
                          << " inv_tau=" << fmt(e.inverse_temperature) << " val_auc=" << fmt(e.val_auc)
                          << " lr=" << e.learning_rate << (e.best ? " *" : "") << '\n';
            });
            std::cout << "trained " << result.steps.size() << " steps; checkpoint " << cfg.out_dir
                      << "/model.lstd\n";
        } else if (eval->parsed()) {
            RunConfig cfg;
            const Model model = load_for_eval(checkpoint, flags, cfg);
            if (eval->count("--predict-labels") > 0) cfg.predict_labels = true;
            const auto dataset = prepare_dataset(cfg);
            const auto report = run_eval(model, cfg, dataset, true);
            for (const auto& r : report.rows) print_metrics(r);
        } else if (ablate->parsed()) {
            const auto cfg = resolve(flags, RunConfig{});
            const auto dataset = prepare_dataset(cfg);
            for (const auto& r : run_label_ablation(cfg, dataset, true)) {
                std::cout << labels::strategy_name(r.strategy) << " steps=" << r.steps
                          << " final_loss=" << fmt(r.final_loss) << " auc=" << fmt(r.in_distribution.auc)
                          << " acc=" << fmt(r.in_distribution.acc);
                if (r.held_out) std::cout << " unseen_auc=" << fmt(r.held_out->auc);
                std::cout << '\n';
            }
        } else if (sweep->parsed()) {
            RunConfig cfg;
            const Model model = load_for_eval(checkpoint, flags, cfg);
            const auto dataset = prepare_dataset(cfg);
            for (const auto& r : run_anchor_sweep(model, cfg, dataset, true)) {
                std::cout << "M=" << r.anchor_size << " mean_acc=" << fmt(r.mean_acc) << " std=" << fmt(r.std_acc)
                          << " min=" << fmt(r.min_acc) << " max=" << fmt(r.max_acc) << '\n';
            }
        } else if (robust->parsed()) {
            RunConfig cfg;
            const Model model = load_for_eval(checkpoint, flags, cfg);
            const auto dataset = prepare_dataset(cfg);
            for (const auto& r : run_robustness(model, cfg, dataset, true)) {
                std::cout << r.kind << ' ' << (r.kind == "clean" ? "" : fmt(r.severity)) << " auc="
                          << fmt(r.metrics.auc) << " acc=" << fmt(r.metrics.acc) << '\n';
            }
        } else if (grad->parsed()) {
            const auto cfg = resolve(flags, RunConfig{});
            check_seed = cfg.seed;
            bool ok = true;
            for (const auto& r : run_grad_checks(check_seed, trials)) {
                std::cout << r.loss << " max_error=" << r.max_error << '\n';
                ok = ok && r.max_error < 1e-3;
            }
            return ok ? 0 : 1;
        }
    } catch (const lasted::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
