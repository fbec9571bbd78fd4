#include "fewtype/patterns.hpp"

#include <algorithm>
#include <set>

namespace fewtype::patterns {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

}  // namespace

std::vector<PatternRule> compile_rules(std::string_view text) {
    std::vector<PatternRule> rules;
    std::set<int> priorities;
    std::size_t pos = 0;
    std::size_t line_no = 0;

    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        if (line.empty() || line[0] == '#') continue;

        auto fields = split_tabs(line);
        if (fields.size() < 4 || fields.size() > 5)
            throw BadPatternError(line_no, "expected 4 or 5 tab-separated fields");

        PatternRule rule;
        rule.category = std::string(fields[0]);
        rule.body = std::string(fields[2]);
        if (rule.category.empty() || rule.body.empty())
            throw BadPatternError(line_no, "empty category or body");

        if (fields[1] == "regex")
            rule.kind = PatternRule::Kind::regex;
        else if (fields[1] == "gazetteer")
            rule.kind = PatternRule::Kind::gazetteer;
        else
            throw BadPatternError(line_no, "kind must be 'regex' or 'gazetteer'");

        try {
            rule.priority = std::stoi(std::string(fields[3]));
        } catch (const std::exception&) {
            throw BadPatternError(line_no, "priority must be an integer");
        }
        if (!priorities.insert(rule.priority).second) throw DuplicatePriorityError(rule.priority);

        if (fields.size() == 5) {
            if (fields[4] == "cs")
                rule.case_sensitive = true;
            else if (fields[4] != "ci")
                throw BadPatternError(line_no, "flag must be 'ci' or 'cs'");
        }

        if (rule.kind == PatternRule::Kind::regex) {
            auto flags = std::regex::ECMAScript;
            if (!rule.case_sensitive) flags |= std::regex::icase;
            try {
                rule.compiled_regex = std::regex(rule.body, flags);
            } catch (const std::regex_error& e) {
                throw BadPatternError(line_no, std::string("regex does not compile: ") + e.what());
            }
        } else {
            std::size_t start = 0;
            while (start <= rule.body.size()) {
                std::size_t comma = rule.body.find(',', start);
                if (comma == std::string::npos) comma = rule.body.size();
                std::string word = rule.body.substr(start, comma - start);
                if (!word.empty())
                    rule.gazetteer_set.insert(rule.case_sensitive ? word
                                                                  : corpus::lowercase(word));
                if (comma == rule.body.size()) break;
                start = comma + 1;
            }
            if (rule.gazetteer_set.empty()) throw BadPatternError(line_no, "empty gazetteer");
        }
        rules.push_back(std::move(rule));
    }

    std::sort(rules.begin(), rules.end(),
              [](const PatternRule& a, const PatternRule& b) { return a.priority > b.priority; });
    return rules;
}

std::optional<std::string> classify_mention(std::string_view mention_text,
                                            const LabeledSentence& context,
                                            std::span<const PatternRule> rules) {
    (void)context;
    std::string surface(mention_text);
    for (const auto& rule : rules) {
        bool hit = false;
        if (rule.kind == PatternRule::Kind::regex) {
            hit = std::regex_search(surface, rule.compiled_regex);
        } else {
            hit = rule.gazetteer_set.count(rule.case_sensitive ? surface
                                                               : corpus::lowercase(surface)) > 0;
        }
        if (hit) return rule.category;
    }
    return std::nullopt;
}

std::vector<PatternPrediction> classify_all(std::span<const corpus::TypingInstance> instances,
                                            std::span<const PatternRule> rules) {
    std::vector<PatternPrediction> out;
    out.reserve(instances.size());
    LabeledSentence empty_context;
    for (const auto& inst : instances)
        out.push_back({inst.id(), classify_mention(inst.surface(), empty_context, rules)});
    return out;
}

MergePolicy MergePolicy::parse(std::string_view text) {
    MergePolicy policy;
    if (text == "model_wins") {
        policy.mode = Mode::model_wins;
    } else if (text == "pattern_wins") {
        policy.mode = Mode::pattern_wins;
    } else if (text.starts_with("pattern_only_for=")) {
        policy.mode = Mode::pattern_only_for;
        std::string_view rest = text.substr(std::string_view("pattern_only_for=").size());
        std::size_t start = 0;
        while (start <= rest.size()) {
            std::size_t comma = rest.find(',', start);
            if (comma == std::string_view::npos) comma = rest.size();
            if (comma > start) policy.categories.emplace_back(rest.substr(start, comma - start));
            if (comma == rest.size()) break;
            start = comma + 1;
        }
        if (policy.categories.empty())
            throw ConfigError("pattern_only_for needs at least one category");
    } else {
        throw ConfigError("unknown merge policy '" + std::string(text) + "'");
    }
    return policy;
}

std::vector<evaluation::LabeledId> merge_predictions(
    std::span<const evaluation::LabeledId> model_preds,
    std::span<const PatternPrediction> pattern_preds, const MergePolicy& policy,
    const LabelSet& labels) {
    if (model_preds.size() != pattern_preds.size())
        throw AlignmentMismatchError("model and pattern prediction counts differ");

    if (policy.mode == MergePolicy::Mode::pattern_only_for)
        for (const auto& cat : policy.categories)
            if (!labels.contains(cat)) throw UnknownLabelError(cat);

    std::vector<evaluation::LabeledId> out;
    out.reserve(model_preds.size());
    for (std::size_t i = 0; i < model_preds.size(); ++i) {
        if (!(model_preds[i].instance == pattern_preds[i].instance))
            throw AlignmentMismatchError("instance " + model_preds[i].instance.str() +
                                         " is not aligned with the pattern predictions");
        out.push_back(model_preds[i]);
        if (policy.mode == MergePolicy::Mode::model_wins) continue;
        const auto& verdict = pattern_preds[i].label;
        if (!verdict || !labels.contains(*verdict)) continue;
        if (policy.mode == MergePolicy::Mode::pattern_only_for &&
            std::find(policy.categories.begin(), policy.categories.end(), *verdict) ==
                policy.categories.end())
            continue;
        out.back().label = *verdict;
    }
    return out;
}

}  // namespace fewtype::patterns
