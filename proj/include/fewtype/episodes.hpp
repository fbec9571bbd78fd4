#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "fewtype/corpus.hpp"

namespace fewtype::episodes {

using corpus::Diagnostic;
using corpus::LabelSet;
using corpus::TypingInstance;

/// One unit of meta-learning work: a K-shot support set and a query set over
/// the same task label set. Support and query are disjoint by identity.
struct Episode {
    std::vector<TypingInstance> support;
    std::vector<TypingInstance> query;
    std::size_t k_support = 0;
    std::size_t k_query = 0;
    LabelSet labels;
};

struct SamplerConfig {
    std::size_t k_shot = 5;
    /// Number of task labels. 0 means "all labels present in the corpus".
    std::size_t n_way = 0;
    /// Forbid two support instances of one label sharing the same lowercased
    /// mention surface.
    bool dedup_surface = false;
    std::uint64_t seed = 0;
};

/// Deterministic stand-in for std::shuffle / uniform_int_distribution, which
/// the standard leaves implementation-defined.
class SplitMixRng {
public:
    explicit SplitMixRng(std::uint64_t seed) : engine_(seed) {}
    std::uint64_t next() { return engine_(); }
    /// Uniform draw from [0, n) via 128-bit multiply-shift.
    std::size_t bounded(std::size_t n);
    /// Fisher-Yates shuffle with bounded() draws.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(i)]);
    }

private:
    std::mt19937_64 engine_;
};

/// k_shot instances per task label, sampled without replacement. With
/// dedup_surface set, surfaces within one label are pairwise distinct.
/// Deterministic in (instances, cfg).
std::vector<TypingInstance> sample_support(std::span<const TypingInstance> instances,
                                           const SamplerConfig& cfg);

/// Sample k_shot + k_query instances per label, split into disjoint support
/// and query. Dedup (when enabled) applies to the support half.
Episode sample_episode(std::span<const TypingInstance> instances, const SamplerConfig& cfg,
                       std::size_t k_query);

/// n_tasks independently sampled episodes; task i uses seed cfg.seed + i so
/// any one task can be regenerated on its own.
std::vector<Episode> make_task_stream(std::span<const TypingInstance> instances,
                                      const SamplerConfig& cfg, std::size_t k_query,
                                      std::size_t n_tasks);

struct ManualSupport {
    std::vector<TypingInstance> instances;
    LabelSet labels;
    std::vector<Diagnostic> diagnostics;  // duplicate-surface warnings etc.
};

/// Load a hand-curated support set from CoNLL text and validate it: exactly
/// k_shot instances per label, coverage of expected_labels when given.
/// Duplicate surfaces within a label are warnings, not errors.
ManualSupport load_manual_support(std::string_view text, std::size_t k_shot,
                                  const LabelSet* expected_labels = nullptr);

}  // namespace fewtype::episodes
