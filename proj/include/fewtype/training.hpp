#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fewtype/backend.hpp"
#include "fewtype/episodes.hpp"
#include "fewtype/prompting.hpp"

namespace fewtype::training {

using backend::Backend;
using backend::LossOpts;
using backend::ParamSet;
using backend::PromptTarget;
using corpus::LabelSet;
using corpus::TypingInstance;
using prompting::BoundVerbalizer;
using prompting::Template;

struct TrainConfig {
    std::size_t inner_batch_size = 8;
    std::size_t epochs = 10;
    double lr = 1e-2;
    std::uint64_t seed = 0;
    /// Mass moved from the gold label to a uniform mixture; 0 keeps targets
    /// one-hot.
    double target_smoothing = 0.0;
    LossOpts loss_opts;
};

/// Divergence of `pred` from `target`: sum_y target_y (ln target_y - ln
/// pred_y). Zero iff the distributions match; equals cross entropy minus
/// target entropy, so for a one-hot target it is -ln pred_gold.
double kl_loss(std::span<const double> pred, std::span<const double> target);

/// The same formula with the arguments' roles swapped (divergence of the
/// target from the prediction). Finite only for strictly positive targets.
double kl_loss_literal(std::span<const double> pred, std::span<const double> target);

/// Target distribution for a gold label: one-hot, or smoothed toward uniform
/// by `smoothing`.
std::vector<double> make_target(const LabelSet& labels, const std::string& gold_label,
                                double smoothing);

/// Tokenize instances through the template and attach targets. The batch
/// order follows the instance order.
std::vector<PromptTarget> build_batch(std::span<const TypingInstance> instances,
                                      const Template& tpl, const Backend& backend,
                                      const LabelSet& labels, double smoothing = 0.0);

struct FinetuneResult {
    ParamSet params;
    std::vector<double> epoch_losses;  // mean minibatch loss per epoch
    std::size_t batches_per_epoch = 0;
};

/// Minibatch gradient descent on the divergence objective: cfg.epochs passes
/// over the support set, reshuffled each epoch from cfg.seed, batch size
/// cfg.inner_batch_size, learning rate cfg.lr.
FinetuneResult finetune(const Backend& backend, const ParamSet& params,
                        std::span<const TypingInstance> support, const Template& tpl,
                        const BoundVerbalizer& verbalizer, const LabelSet& labels,
                        const TrainConfig& cfg);

struct Prediction {
    corpus::InstanceId instance;
    std::string gold;
    std::string label;                 // argmax, ties to the lowest label index
    std::vector<double> distribution;  // LabelSet order
};

/// Single-instance prediction: encode, word distribution, verbalizer.
Prediction predict(const Backend& backend, const ParamSet& params, const TypingInstance& inst,
                   const Template& tpl, const BoundVerbalizer& verbalizer, const LabelSet& labels);

std::vector<Prediction> predict_all(const Backend& backend, const ParamSet& params,
                                    std::span<const TypingInstance> instances, const Template& tpl,
                                    const BoundVerbalizer& verbalizer, const LabelSet& labels);

/// Argmax with ties broken toward the lowest index.
std::size_t argmax_label(std::span<const double> distribution);

}  // namespace fewtype::training
