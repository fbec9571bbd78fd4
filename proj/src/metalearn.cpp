#include "fewtype/metalearn.hpp"

#include "fewtype/evaluation.hpp"

namespace fewtype::metalearn {

MetaTask<PromptObjective::Batch> episode_to_task(const Backend& backend,
                                                 const episodes::Episode& episode,
                                                 const training::Template& tpl,
                                                 const prompting::Verbalizer& verbalizer,
                                                 double target_smoothing) {
    prompting::BoundVerbalizer bound(verbalizer, backend.tokenizer(), episode.labels);
    MetaTask<PromptObjective::Batch> task;
    task.support.items =
        training::build_batch(episode.support, tpl, backend, episode.labels, target_smoothing);
    task.support.verbalizer = bound;
    task.support.labels = episode.labels;
    task.query.items =
        training::build_batch(episode.query, tpl, backend, episode.labels, target_smoothing);
    task.query.verbalizer = bound;
    task.query.labels = episode.labels;
    return task;
}

ParamSet meta_train_episodes(const Backend& backend, ParamSet theta,
                             std::span<const episodes::Episode> eps,
                             const training::Template& tpl,
                             const prompting::Verbalizer& verbalizer, const MetaConfig& cfg,
                             double target_smoothing, const MetaTraceSink& sink,
                             backend::LossOpts loss_opts) {
    std::vector<MetaTask<PromptObjective::Batch>> tasks;
    tasks.reserve(eps.size());
    for (const auto& ep : eps)
        tasks.push_back(episode_to_task(backend, ep, tpl, verbalizer, target_smoothing));
    PromptObjective obj(backend, loss_opts);
    return meta_train(obj, std::move(theta),
                      std::span<const MetaTask<PromptObjective::Batch>>(tasks), cfg, sink);
}

evaluation::EvalReport meta_test(const Backend& backend, const ParamSet& theta_star,
                                 std::span<const corpus::TypingInstance> target_support,
                                 std::span<const corpus::TypingInstance> target_test,
                                 const training::Template& tpl,
                                 const prompting::BoundVerbalizer& verbalizer,
                                 const corpus::LabelSet& labels,
                                 const training::TrainConfig& train_cfg) {
    if (target_test.empty()) throw EmptyEvaluationError();
    auto tuned = training::finetune(backend, theta_star, target_support, tpl, verbalizer, labels,
                                    train_cfg);
    auto preds =
        training::predict_all(backend, tuned.params, target_test, tpl, verbalizer, labels);

    std::vector<evaluation::LabeledId> pred_ids, gold_ids;
    pred_ids.reserve(preds.size());
    gold_ids.reserve(preds.size());
    for (const auto& p : preds) {
        pred_ids.push_back({p.instance, p.label});
        gold_ids.push_back({p.instance, p.gold});
    }
    return evaluation::evaluate(pred_ids, gold_ids, labels);
}

}  // namespace fewtype::metalearn
