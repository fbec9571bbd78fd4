#pragma once

#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "fewtype/corpus.hpp"
#include "fewtype/evaluation.hpp"

namespace fewtype::patterns {

using corpus::LabeledSentence;
using corpus::LabelSet;

/// One declarative classification rule: a regex searched against the mention
/// surface, or a gazetteer the surface must equal (word for word).
struct PatternRule {
    std::string category;
    enum class Kind { regex, gazetteer } kind = Kind::gazetteer;
    std::string body;  // source text of the pattern or word list
    int priority = 0;
    bool case_sensitive = false;

    std::regex compiled_regex;                      // kind == regex
    std::unordered_set<std::string> gazetteer_set;  // kind == gazetteer, lowercased when ci
};

/// Parse "<category>\t<kind>\t<body>\t<priority>[\t(ci|cs)]" lines ('#'
/// comments allowed) and compile them, sorted by descending priority.
/// Throws BadPatternError for syntax/regex problems and
/// DuplicatePriorityError when two rules share a priority.
std::vector<PatternRule> compile_rules(std::string_view text);

/// Category of the highest-priority rule matching the mention surface, if
/// any. The sentence context parameter is reserved for context-sensitive
/// rule kinds; the shipped kinds ignore it.
std::optional<std::string> classify_mention(std::string_view mention_text,
                                            const LabeledSentence& context,
                                            std::span<const PatternRule> rules);

struct MergePolicy {
    enum class Mode { pattern_wins, model_wins, pattern_only_for } mode = Mode::model_wins;
    std::vector<std::string> categories;  // pattern_only_for

    /// Parse "model_wins", "pattern_wins" or "pattern_only_for=A,B".
    static MergePolicy parse(std::string_view text);
};

/// A rule verdict for one instance; label is absent when no rule matched.
struct PatternPrediction {
    corpus::InstanceId instance;
    std::optional<std::string> label;
};

/// Run the rules over every instance's mention surface.
std::vector<PatternPrediction> classify_all(std::span<const corpus::TypingInstance> instances,
                                            std::span<const PatternRule> rules);

/// Overlay pattern predictions onto model predictions. The sequences must be
/// aligned on identical instance ids in identical order
/// (AlignmentMismatchError otherwise). Pattern labels outside `labels` never
/// reach the output.
std::vector<evaluation::LabeledId> merge_predictions(
    std::span<const evaluation::LabeledId> model_preds,
    std::span<const PatternPrediction> pattern_preds, const MergePolicy& policy,
    const LabelSet& labels);

}  // namespace fewtype::patterns
