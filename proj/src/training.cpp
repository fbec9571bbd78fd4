#include "fewtype/training.hpp"

#include <cmath>

namespace fewtype::training {

namespace {

void check_distribution(std::span<const double> d, const char* what) {
    if (d.empty()) throw InvalidDistributionError(std::string(what) + " is empty");
    double sum = 0.0;
    for (double v : d) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InvalidDistributionError(std::string(what) + " has a negative or non-finite entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw InvalidDistributionError(std::string(what) + " sums to " + std::to_string(sum));
}

}  // namespace

double kl_loss(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size())
        throw InvalidDistributionError("pred and target have different sizes");
    check_distribution(pred, "pred");
    check_distribution(target, "target");
    double out = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (target[i] == 0.0) continue;
        out += target[i] * (std::log(target[i]) - std::log(pred[i]));
    }
    return out;
}

double kl_loss_literal(std::span<const double> pred, std::span<const double> target) {
    return kl_loss(target, pred);
}

std::vector<double> make_target(const LabelSet& labels, const std::string& gold_label,
                                double smoothing) {
    if (smoothing < 0.0 || smoothing >= 0.5)
        throw ConfigError("target_smoothing must lie in [0, 0.5)");
    std::size_t gold = labels.index_of(gold_label);
    double n = static_cast<double>(labels.size());
    std::vector<double> t(labels.size(), smoothing / n);
    t[gold] += 1.0 - smoothing;
    return t;
}

std::vector<PromptTarget> build_batch(std::span<const TypingInstance> instances,
                                      const Template& tpl, const Backend& backend,
                                      const LabelSet& labels, double smoothing) {
    std::vector<PromptTarget> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) {
        PromptTarget item;
        item.input =
            prompting::apply_template(inst, tpl, backend.tokenizer(), backend.spec().max_seq_len);
        item.target = make_target(labels, inst.label, smoothing);
        out.push_back(std::move(item));
    }
    return out;
}

FinetuneResult finetune(const Backend& backend, const ParamSet& params,
                        std::span<const TypingInstance> support, const Template& tpl,
                        const BoundVerbalizer& verbalizer, const LabelSet& labels,
                        const TrainConfig& cfg) {
    if (support.empty()) throw EmptyCorpusError("finetune needs a non-empty support set");
    if (cfg.epochs == 0 || cfg.inner_batch_size == 0)
        throw ConfigError("epochs and inner_batch_size must be >= 1");

    auto batch = build_batch(support, tpl, backend, labels, cfg.target_smoothing);
    episodes::SplitMixRng rng(cfg.seed);

    FinetuneResult out;
    out.params = params;
    std::vector<std::size_t> order(batch.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<PromptTarget> minibatch;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.inner_batch_size) {
            std::size_t end = std::min(order.size(), start + cfg.inner_batch_size);
            minibatch.clear();
            for (std::size_t i = start; i < end; ++i) minibatch.push_back(batch[order[i]]);
            auto lg = backend.loss_and_grad(out.params, minibatch, verbalizer, labels,
                                            cfg.loss_opts);
            out.params = backend::apply_update(out.params, lg.grad, cfg.lr);
            epoch_loss += lg.loss;
            ++n_batches;
        }
        out.epoch_losses.push_back(epoch_loss / static_cast<double>(n_batches));
        out.batches_per_epoch = n_batches;
    }
    return out;
}

std::size_t argmax_label(std::span<const double> distribution) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < distribution.size(); ++i)
        if (distribution[i] > distribution[best]) best = i;
    return best;
}

Prediction predict(const Backend& backend, const ParamSet& params, const TypingInstance& inst,
                   const Template& tpl, const BoundVerbalizer& verbalizer,
                   const LabelSet& labels) {
    auto input = prompting::apply_template(inst, tpl, backend.tokenizer(), backend.spec().max_seq_len);
    auto h = backend.encode(input, params);
    auto pw = backend.word_distribution(h, params);
    Prediction pred;
    pred.instance = inst.id();
    pred.gold = inst.label;
    pred.distribution = prompting::label_distribution(pw, verbalizer, labels);
    pred.label = labels.name(argmax_label(pred.distribution));
    return pred;
}

std::vector<Prediction> predict_all(const Backend& backend, const ParamSet& params,
                                    std::span<const TypingInstance> instances, const Template& tpl,
                                    const BoundVerbalizer& verbalizer, const LabelSet& labels) {
    std::vector<Prediction> out;
    out.reserve(instances.size());
    for (const auto& inst : instances)
        out.push_back(predict(backend, params, inst, tpl, verbalizer, labels));
    return out;
}

}  // namespace fewtype::training
