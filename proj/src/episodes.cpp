#include "fewtype/episodes.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace fewtype::episodes {

std::size_t SplitMixRng::bounded(std::size_t n) {
    if (n == 0) return 0;
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(engine_()) * static_cast<unsigned __int128>(n)) >> 64);
}

namespace {

// Candidate indices per label, labels in first-appearance order.
struct Pools {
    LabelSet labels;
    std::vector<std::vector<std::size_t>> by_label;  // indices into the instance span
};

Pools group_by_label(std::span<const TypingInstance> instances) {
    Pools pools;
    pools.labels = corpus::build_label_set(instances);
    pools.by_label.resize(pools.labels.size());
    for (std::size_t i = 0; i < instances.size(); ++i)
        pools.by_label[pools.labels.index_of(instances[i].label)].push_back(i);
    return pools;
}

// Choose the task's n_way labels: all of them when n_way covers the
// inventory, otherwise a seeded subset kept in inventory order.
std::vector<std::size_t> pick_label_indices(const Pools& pools, const SamplerConfig& cfg,
                                            SplitMixRng& rng) {
    if (cfg.n_way == 1) throw ConfigError("n_way must be >= 2 (or 0 for all labels)");
    std::size_t n_way = cfg.n_way == 0 ? pools.labels.size() : cfg.n_way;
    if (n_way > pools.labels.size()) throw InsufficientLabelsError(pools.labels.size(), n_way);
    std::vector<std::size_t> all(pools.labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    if (n_way < all.size()) {
        rng.shuffle(all);
        all.resize(n_way);
        std::sort(all.begin(), all.end());
    }
    return all;
}

// Pick `count` candidates from a shuffled pool. With dedup, surfaces must be
// pairwise distinct; `have` for the error message is then the number of
// distinct surfaces available.
std::vector<std::size_t> pick_candidates(std::span<const TypingInstance> instances,
                                         const std::vector<std::size_t>& pool,
                                         const std::string& label, std::size_t count, bool dedup,
                                         SplitMixRng& rng,
                                         std::vector<std::size_t>* leftovers = nullptr) {
    std::vector<std::size_t> order = pool;
    rng.shuffle(order);

    std::vector<std::size_t> picked;
    std::unordered_set<std::string> seen;
    for (std::size_t idx : order) {
        if (picked.size() == count) {
            if (leftovers) leftovers->push_back(idx);
            continue;
        }
        if (dedup) {
            std::string key = corpus::lowercase(instances[idx].surface());
            if (!seen.insert(std::move(key)).second) {
                if (leftovers) leftovers->push_back(idx);
                continue;
            }
        }
        picked.push_back(idx);
    }
    if (picked.size() < count) {
        std::size_t have = picked.size();
        if (dedup) {
            std::unordered_set<std::string> distinct;
            for (std::size_t idx : pool) distinct.insert(corpus::lowercase(instances[idx].surface()));
            have = distinct.size();
        } else {
            have = pool.size();
        }
        throw InsufficientInstancesError(label, have, count);
    }
    return picked;
}

}  // namespace

std::vector<TypingInstance> sample_support(std::span<const TypingInstance> instances,
                                           const SamplerConfig& cfg) {
    if (cfg.k_shot == 0) throw ConfigError("k_shot must be >= 1");
    Pools pools = group_by_label(instances);
    SplitMixRng rng(cfg.seed);
    auto label_idx = pick_label_indices(pools, cfg, rng);

    std::vector<TypingInstance> out;
    for (std::size_t li : label_idx) {
        auto picked = pick_candidates(instances, pools.by_label[li], pools.labels.name(li),
                                      cfg.k_shot, cfg.dedup_surface, rng);
        for (std::size_t idx : picked) out.push_back(instances[idx]);
    }
    return out;
}

Episode sample_episode(std::span<const TypingInstance> instances, const SamplerConfig& cfg,
                       std::size_t k_query) {
    if (cfg.k_shot == 0) throw ConfigError("k_shot must be >= 1");
    Pools pools = group_by_label(instances);
    SplitMixRng rng(cfg.seed);
    auto label_idx = pick_label_indices(pools, cfg, rng);

    Episode ep;
    ep.k_support = cfg.k_shot;
    ep.k_query = k_query;
    std::vector<std::string> names;
    for (std::size_t li : label_idx) names.push_back(pools.labels.name(li));
    ep.labels = LabelSet(std::move(names));

    for (std::size_t li : label_idx) {
        const auto& label = pools.labels.name(li);
        if (pools.by_label[li].size() < cfg.k_shot + k_query)
            throw InsufficientInstancesError(label, pools.by_label[li].size(),
                                             cfg.k_shot + k_query);
        // Support first (dedup-aware), query from what the support pass left
        // over, in that same shuffled order. Query sampling is without
        // replacement; scarcity is an error rather than silent reuse.
        std::vector<std::size_t> leftovers;
        auto sup = pick_candidates(instances, pools.by_label[li], label, cfg.k_shot,
                                   cfg.dedup_surface, rng, &leftovers);
        if (leftovers.size() < k_query)
            throw InsufficientInstancesError(label, sup.size() + leftovers.size(),
                                             cfg.k_shot + k_query);
        for (std::size_t idx : sup) ep.support.push_back(instances[idx]);
        for (std::size_t q = 0; q < k_query; ++q) ep.query.push_back(instances[leftovers[q]]);
    }
    return ep;
}

std::vector<Episode> make_task_stream(std::span<const TypingInstance> instances,
                                      const SamplerConfig& cfg, std::size_t k_query,
                                      std::size_t n_tasks) {
    std::vector<Episode> out;
    out.reserve(n_tasks);
    for (std::size_t t = 0; t < n_tasks; ++t) {
        SamplerConfig per_task = cfg;
        per_task.seed = cfg.seed + t;
        out.push_back(sample_episode(instances, per_task, k_query));
    }
    return out;
}

ManualSupport load_manual_support(std::string_view text, std::size_t k_shot,
                                  const LabelSet* expected_labels) {
    auto parsed = corpus::parse_conll(text);
    ManualSupport out;
    out.diagnostics = parsed.diagnostics;
    out.instances = corpus::extract_all_mentions(corpus::require_sentences(parsed));
    if (out.instances.empty()) throw EmptyCorpusError("support file contains no mentions");
    out.labels = corpus::build_label_set(out.instances);

    std::map<std::string, std::size_t> counts;
    std::map<std::string, std::vector<std::string>> surfaces;
    for (const auto& inst : out.instances) {
        ++counts[inst.label];
        surfaces[inst.label].push_back(corpus::lowercase(inst.surface()));
    }

    if (expected_labels)
        for (const auto& name : expected_labels->names())
            if (!counts.count(name)) throw CountMismatchError(name, 0, k_shot);
    for (const auto& [label, n] : counts)
        if (n != k_shot) throw CountMismatchError(label, n, k_shot);

    for (auto& [label, surf] : surfaces) {
        std::sort(surf.begin(), surf.end());
        for (std::size_t i = 1; i < surf.size(); ++i)
            if (surf[i] == surf[i - 1] && (i == 1 || surf[i] != surf[i - 2]))
                out.diagnostics.push_back({corpus::DiagnosticSeverity::warning, 0,
                                           "label '" + label + "' repeats mention surface '" +
                                               surf[i] + "'"});
    }
    return out;
}

}  // namespace fewtype::episodes
