#pragma once

#include <concepts>
#include <functional>
#include <span>
#include <vector>

#include "fewtype/backend.hpp"
#include "fewtype/episodes.hpp"
#include "fewtype/evaluation.hpp"
#include "fewtype/training.hpp"

namespace fewtype::metalearn {

using backend::Backend;
using backend::LossGrad;
using backend::ParamSet;

struct MetaConfig {
    double inner_lr = 1e-2;           // alpha, per-task adaptation step
    double meta_lr = 5e-3;            // beta, initialization step
    std::size_t outer_batch_size = 32;
    std::size_t max_meta_steps = 15;
    std::size_t n_tasks = 40;
    std::size_t inner_epochs = 1;     // full-batch inner steps per task
    bool first_order = true;
    /// Aggregate task gradients by sum instead of the default mean; with the
    /// sum, the effective meta step grows with the outer batch size.
    bool sum_aggregate = false;
    std::uint64_t seed = 0;           // drives the task-pool cycling order
};

/// Anything MAML can run over: a loss with gradient and Hessian-vector
/// product, parameterized by a ParamSet, over an opaque batch type.
template <class O>
concept MetaObjective = requires(const O& o, const ParamSet& p, const typename O::Batch& b,
                                 const ParamSet& v) {
    { o.loss(p, b) } -> std::convertible_to<double>;
    { o.loss_and_grad(p, b) } -> std::convertible_to<LossGrad>;
    { o.hessian_vector(p, b, v) } -> std::convertible_to<ParamSet>;
};

template <class Batch>
struct MetaTask {
    Batch support;
    Batch query;
};

/// One adaptation pass: inner_epochs full-batch gradient steps from theta on
/// the task support at rate alpha. The default single step is
/// phi = theta - alpha * grad L(theta, support).
template <MetaObjective O>
ParamSet inner_update(const O& obj, const ParamSet& theta, const typename O::Batch& support,
                      double alpha, std::size_t inner_epochs = 1) {
    ParamSet phi = theta;
    for (std::size_t step = 0; step < inner_epochs; ++step)
        phi = backend::apply_update(phi, obj.loss_and_grad(phi, support).grad, alpha);
    return phi;
}

template <MetaObjective O>
double task_query_loss(const O& obj, const ParamSet& phi, const typename O::Batch& query) {
    return obj.loss(phi, query);
}

struct MetaStepResult {
    ParamSet params;
    double query_loss = 0.0;  // mean adapted-query loss over the batch tasks
    std::size_t n_tasks = 0;
};

/// One meta update over a batch of tasks. Each task contributes the gradient
/// of its adapted query loss; first_order treats grad_phi as grad_theta,
/// otherwise the gradient is pulled back through every inner step with
/// Hessian-vector products. Task gradients are averaged (or summed, per
/// config) and applied at the meta rate.
template <MetaObjective O>
MetaStepResult meta_step(const O& obj, const ParamSet& theta,
                         std::span<const MetaTask<typename O::Batch>> tasks,
                         const MetaConfig& cfg) {
    if (tasks.empty()) throw ConfigError("meta_step needs at least one task");

    ParamSet total = backend::zeros_like(theta);
    double loss_sum = 0.0;
    for (const auto& task : tasks) {
        std::vector<ParamSet> trajectory;
        trajectory.push_back(theta);
        for (std::size_t step = 1; step < cfg.inner_epochs; ++step)
            trajectory.push_back(backend::apply_update(
                trajectory.back(), obj.loss_and_grad(trajectory.back(), task.support).grad,
                cfg.inner_lr));
        ParamSet phi = backend::apply_update(
            trajectory.back(), obj.loss_and_grad(trajectory.back(), task.support).grad,
            cfg.inner_lr);

        auto query = obj.loss_and_grad(phi, task.query);
        loss_sum += query.loss;
        ParamSet task_grad = std::move(query.grad);
        if (!cfg.first_order) {
            // d/dtheta L(phi(theta)) = (I - alpha H)^T g, applied through
            // each inner step from last to first.
            for (auto it = trajectory.rbegin(); it != trajectory.rend(); ++it) {
                ParamSet hv = obj.hessian_vector(*it, task.support, task_grad);
                backend::axpy(task_grad, -cfg.inner_lr, hv);
            }
        }
        backend::axpy(total, 1.0, task_grad);
    }

    if (!cfg.sum_aggregate) backend::scale(total, 1.0 / static_cast<double>(tasks.size()));
    MetaStepResult out;
    out.params = backend::apply_update(theta, total, cfg.meta_lr);
    out.query_loss = loss_sum / static_cast<double>(tasks.size());
    out.n_tasks = tasks.size();
    if (!std::isfinite(out.query_loss) || !backend::all_finite(out.params))
        throw NonFiniteLossError("meta update diverged");
    return out;
}

struct MetaStepTrace {
    std::size_t meta_step = 0;  // 1-based
    double mean_query_loss = 0.0;
    std::size_t n_tasks = 0;
};
using MetaTraceSink = std::function<void(const MetaStepTrace&, const ParamSet&)>;

/// Run max_meta_steps meta updates, drawing outer_batch_size tasks per step
/// from the pool and cycling it in reshuffled order when exhausted. The
/// trace sink (optional) sees every step's aggregate loss and parameters.
template <MetaObjective O>
ParamSet meta_train(const O& obj, ParamSet theta,
                    std::span<const MetaTask<typename O::Batch>> pool, const MetaConfig& cfg,
                    const MetaTraceSink& sink = {}) {
    if (pool.empty()) throw TaskStreamExhaustedError();
    episodes::SplitMixRng rng(cfg.seed);
    std::vector<std::size_t> order;
    std::size_t cursor = 0;

    auto next_task = [&]() -> const MetaTask<typename O::Batch>& {
        if (cursor == order.size()) {
            order.resize(pool.size());
            for (std::size_t i = 0; i < pool.size(); ++i) order[i] = i;
            rng.shuffle(order);
            cursor = 0;
        }
        return pool[order[cursor++]];
    };

    for (std::size_t step = 1; step <= cfg.max_meta_steps; ++step) {
        std::vector<MetaTask<typename O::Batch>> batch;
        batch.reserve(cfg.outer_batch_size);
        for (std::size_t i = 0; i < cfg.outer_batch_size; ++i) batch.push_back(next_task());
        auto result = meta_step(obj, theta, std::span<const MetaTask<typename O::Batch>>(batch),
                                cfg);
        theta = std::move(result.params);
        if (sink) sink({step, result.query_loss, result.n_tasks}, theta);
    }
    return theta;
}

/// The MLM-prompt objective: batches carry their own task label set and
/// bound verbalizer, so meta-training tasks with different label subsets
/// coexist in one pool.
class PromptObjective {
public:
    struct Batch {
        std::vector<backend::PromptTarget> items;
        prompting::BoundVerbalizer verbalizer;
        corpus::LabelSet labels;
    };

    PromptObjective(const Backend& backend, backend::LossOpts opts = {})
        : backend_(&backend), opts_(opts) {}

    double loss(const ParamSet& p, const Batch& b) const {
        return backend_->loss(p, b.items, b.verbalizer, b.labels, opts_);
    }
    LossGrad loss_and_grad(const ParamSet& p, const Batch& b) const {
        return backend_->loss_and_grad(p, b.items, b.verbalizer, b.labels, opts_);
    }
    ParamSet hessian_vector(const ParamSet& p, const Batch& b, const ParamSet& v) const {
        return backend_->hessian_vector(p, b.items, b.verbalizer, b.labels, v, opts_);
    }

private:
    const Backend* backend_;
    backend::LossOpts opts_;
};

/// Tokenize an episode into a prompt task. The episode's own label set
/// drives targets and the verbalizer binding.
MetaTask<PromptObjective::Batch> episode_to_task(const Backend& backend,
                                                 const episodes::Episode& episode,
                                                 const training::Template& tpl,
                                                 const prompting::Verbalizer& verbalizer,
                                                 double target_smoothing = 0.0);

/// Meta-train over episodes: convert, then run the generic loop.
ParamSet meta_train_episodes(const Backend& backend, ParamSet theta,
                             std::span<const episodes::Episode> episodes,
                             const training::Template& tpl,
                             const prompting::Verbalizer& verbalizer, const MetaConfig& cfg,
                             double target_smoothing = 0.0, const MetaTraceSink& sink = {},
                             backend::LossOpts loss_opts = {});

/// Meta-testing: finetune theta* on the target support set, predict the
/// target test set and score it.
evaluation::EvalReport meta_test(const Backend& backend, const ParamSet& theta_star,
                                 std::span<const corpus::TypingInstance> target_support,
                                 std::span<const corpus::TypingInstance> target_test,
                                 const training::Template& tpl,
                                 const prompting::BoundVerbalizer& verbalizer,
                                 const corpus::LabelSet& labels,
                                 const training::TrainConfig& train_cfg);

}  // namespace fewtype::metalearn
