#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>

#include "csv.hpp"
#include "lasted/autodiff/adam.hpp"
#include "lasted/autodiff/ops.hpp"
#include "lasted/baselines/baselines.hpp"
#include "lasted/contrastive/contrastive.hpp"
#include "lasted/error.hpp"
#include "lasted/harness/experiments.hpp"
#include "lasted/metrics/metrics.hpp"
#include "lasted/random.hpp"

namespace lasted::harness {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kBatchStream = 0xba7c4;
constexpr std::uint64_t kAugmentStream = 0xa06;
constexpr std::uint64_t kValStream = 0x7a1;

ad::Tensor batch_tensor(const data::Corpus& corpus, const data::Batch& batch, std::size_t patch,
                        std::uint64_t seed, std::size_t epoch, const data::AugmentPolicy& policy) {
    const std::size_t per = 3 * patch * patch;
    std::vector<double> values(batch.samples.size() * per);
    for (std::size_t i = 0; i < batch.samples.size(); ++i) {
        const std::size_t idx = batch.samples[i];
        const auto img = data::augment_train(corpus.samples[idx], patch,
                                             derive_seed(seed, {kAugmentStream, epoch, idx}), policy);
        std::copy(img.pixels.begin(), img.pixels.end(), values.begin() + static_cast<std::ptrdiff_t>(i * per));
    }
    return ad::Tensor::from({batch.samples.size(), 3, patch, patch}, std::move(values));
}

struct StepLoss {
    ad::Tensor total;
    double image_axis = 0.0;
    double text_axis = 0.0;
};

StepLoss forward(const Model& model, const labels::LabelSet& set, const ad::Tensor& images,
                 std::span<const std::size_t> labels) {
    const auto img = encoders::encode_image(images, model.image);
    switch (model.config.paradigm) {
        case baselines::Paradigm::Lasted: {
            const auto txt = encoders::encode_tokens(set.tokenized(), model.text);
            auto loss = contrastive::total_loss(img, labels, txt, model.temperature);
            return {loss.total, loss.image_axis.item(), loss.text_axis.item()};
        }
        case baselines::Paradigm::Classification:
            return {baselines::classification_loss(img, labels, *model.head), 0.0, 0.0};
        case baselines::Paradigm::ImageContrastive:
            return {baselines::image_contrastive_loss(img, labels), 0.0, 0.0};
    }
    throw ArgumentError("unknown paradigm");
}

// Mean over media of the pair AUC on the validation split.
double validation_auc(const Model& model, const RunConfig& cfg, const data::Corpus& val) {
    double total = 0.0;
    int media = 0;
    for (auto medium : {labels::Medium::Photo, labels::Medium::Painting}) {
        std::vector<std::size_t> idx;
        std::vector<std::size_t> cats;
        for (std::size_t i = 0; i < val.samples.size(); ++i) {
            if (val.samples[i].medium != medium) continue;
            idx.push_back(i);
            cats.push_back(val.samples[i].authenticity == labels::Authenticity::Real ? 0 : 1);
        }
        if (std::count(cats.begin(), cats.end(), 0) < 2 || std::count(cats.begin(), cats.end(), 1) < 2) continue;
        const auto rows = embed_samples(model, val, idx, cfg.patch);
        const auto pairs = metrics::sample_pairs(rows, cats, cfg.val_pairs, cfg.val_pairs,
                                                 derive_seed(cfg.seed, {kValStream, static_cast<std::uint64_t>(medium)}));
        total += metrics::roc_auc(pairs);
        ++media;
    }
    if (media == 0) throw DataError("validation split has no medium with two real and two synthetic images");
    return total / media;
}

}  // namespace

bool PlateauSchedule::update(double score, double& learning_rate) {
    if (score > best) {
        best = score;
        stagnant = 0;
        return true;
    }
    if (++stagnant >= patience) {
        learning_rate *= decay;
        stagnant = 0;
    }
    return false;
}

TrainResult run_train(const RunConfig& cfg, const data::Dataset& dataset, bool write_outputs,
                      const std::function<void(const EpochRecord&)>& on_epoch) {
    validate(cfg);
    const labels::LabelSet set(cfg.labels);
    const data::BalancedBatches batches(data::label_pools(dataset.train, set), cfg.batch_size,
                                        derive_seed(cfg.seed, {kBatchStream}));
    const auto policy = augment_policy(cfg);
    const std::string hash = config_hash(cfg);
    const std::filesystem::path out_dir(cfg.out_dir);

    Model model = init_model(cfg);
    auto params = model.trainable();
    ad::AdamState adam;
    adam.learning_rate = cfg.learning_rate;
    adam.init(params);

    TrainResult result{clone(model), {}, {}};
    round_to_float(result.model);
    PlateauSchedule schedule{cfg.lr_patience, cfg.lr_decay};
    std::size_t global_step = 0;
    bool stop = false;

    for (std::size_t epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
        EpochRecord rec;
        rec.epoch = epoch;
        rec.learning_rate = adam.learning_rate;
        for (const auto& batch : batches.epoch(epoch)) {
            if (cfg.max_steps != 0 && global_step >= cfg.max_steps) {
                stop = true;
                break;
            }
            StepRecord step{epoch, global_step, 0.0, 0.0, 0.0, 0.0, adam.learning_rate};
            try {
                const auto images = batch_tensor(dataset.train, batch, cfg.patch, cfg.seed, epoch, policy);
                for (auto& p : params) p.zero_grad();
                auto loss = forward(model, set, images, batch.labels);
                step.loss = loss.total.item();
                if (!std::isfinite(step.loss)) throw NonFiniteError("loss is not finite");
                loss.total.backward();
                ad::adam_step(params, adam);
                contrastive::clamp_temperature(model.temperature);
                step.image_axis = loss.image_axis;
                step.text_axis = loss.text_axis;
            } catch (const NonFiniteError& e) {
                const auto dump = out_dir / "diverged.lstd";
                Model state = clone(model);
                save_checkpoint(dump, state);
                throw NonFiniteError("training diverged at epoch " + std::to_string(epoch) + ", step " +
                                     std::to_string(global_step) + " (" + e.what() + "); state dumped to " +
                                     dump.string());
            }
            step.inverse_temperature = model.temperature.inverse();
            result.steps.push_back(step);
            rec.loss += step.loss;
            rec.image_axis += step.image_axis;
            rec.text_axis += step.text_axis;
            ++rec.steps;
            ++global_step;
        }
        if (rec.steps == 0) break;
        rec.loss /= rec.steps;
        rec.image_axis /= rec.steps;
        rec.text_axis /= rec.steps;
        rec.inverse_temperature = model.temperature.inverse();
        rec.val_auc = validation_auc(model, cfg, dataset.val);
        if (schedule.update(rec.val_auc, adam.learning_rate)) {
            rec.best = true;
            result.model = clone(model);
            round_to_float(result.model);
        }
        result.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }

    if (write_outputs) {
        save_checkpoint(out_dir / "model.lstd", result.model);
        detail::CsvWriter log(out_dir / "train_log.csv", hash,
                              {"epoch", "steps", "loss", "image_axis_loss", "text_axis_loss",
                               "inverse_temperature", "val_auc", "learning_rate", "best"});
        for (const auto& e : result.epochs) {
            log.row({std::to_string(e.epoch), std::to_string(e.steps), detail::num(e.loss),
                     detail::num(e.image_axis), detail::num(e.text_axis),
                     detail::num(e.inverse_temperature), detail::num(e.val_auc),
                     detail::num(e.learning_rate), e.best ? "1" : "0"});
        }
    }
    return result;
}

}  // namespace lasted::harness
