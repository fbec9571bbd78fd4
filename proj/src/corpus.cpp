#include "fewtype/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

namespace fewtype::corpus {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(),
                       [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

struct TagParts {
    char prefix = 'O';       // 'B', 'I' or 'O'
    std::string_view label;  // empty for O
};

// Returns the parsed tag, or throws for tags outside the BIO scheme.
TagParts parse_tag(std::string_view tag, std::size_t line_no) {
    if (tag == "O") return {};
    if (tag.size() >= 3 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-')
        return {tag[0], tag.substr(2)};
    throw MalformedLineError(line_no, "tag '" + std::string(tag) + "' is not O, B-<label> or I-<label>");
}

}  // namespace

std::string TypingInstance::surface() const {
    std::string out;
    for (std::size_t i = span_start; i <= span_end; ++i) {
        if (!out.empty()) out += ' ';
        out += tokens[i];
    }
    return out;
}

std::string TypingInstance::sentence_text() const {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
    std::unordered_set<std::string_view> seen;
    for (const auto& n : names_)
        if (!seen.insert(n).second)
            throw ConfigError("duplicate label '" + n + "' in label set");
}

bool LabelSet::contains(std::string_view label) const {
    return std::find(names_.begin(), names_.end(), label) != names_.end();
}

std::size_t LabelSet::index_of(std::string_view label) const {
    auto it = std::find(names_.begin(), names_.end(), label);
    if (it == names_.end()) throw UnknownLabelError(std::string(label));
    return static_cast<std::size_t>(it - names_.begin());
}

ParsedCorpus parse_conll(std::string_view text) {
    ParsedCorpus out;
    LabeledSentence current;
    std::size_t line_no = 0;
    std::size_t pos = 0;

    auto flush = [&] {
        if (!current.tokens.empty()) {
            out.sentences.push_back(std::move(current));
            current = {};
        }
    };

    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        if (is_blank(line)) {
            flush();
            continue;
        }
        if (line.starts_with("-DOCSTART-")) continue;

        auto fields = split_fields(line);
        if (fields.size() != 2)
            throw MalformedLineError(line_no, "expected 2 whitespace-separated fields, got " +
                                                  std::to_string(fields.size()));
        auto tag = parse_tag(fields[1], line_no);

        // Repair I- tags with no compatible predecessor to B-. Rejecting such
        // sentences would bias sampling, so they are kept with a warning.
        if (tag.prefix == 'I') {
            bool compatible = false;
            if (!current.tags.empty()) {
                const std::string& prev = current.tags.back();
                compatible = prev.size() >= 2 && prev.substr(2) == tag.label;
            }
            if (!compatible) {
                out.diagnostics.push_back(
                    {DiagnosticSeverity::warning, line_no,
                     "repaired I-" + std::string(tag.label) + " to B-" + std::string(tag.label)});
                tag.prefix = 'B';
            }
        }

        if (current.tokens.empty()) current.first_line = line_no;
        current.tokens.emplace_back(fields[0]);
        if (tag.prefix == 'O')
            current.tags.emplace_back("O");
        else
            current.tags.emplace_back(std::string(1, tag.prefix) + "-" + std::string(tag.label));
    }
    flush();
    return out;
}

const std::vector<LabeledSentence>& require_sentences(const ParsedCorpus& parsed) {
    if (parsed.sentences.empty()) throw EmptyCorpusError();
    return parsed.sentences;
}

std::string to_conll(std::span<const LabeledSentence> sentences) {
    std::string out;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
        if (s > 0) out += '\n';
        for (std::size_t i = 0; i < sentences[s].tokens.size(); ++i) {
            out += sentences[s].tokens[i];
            out += '\t';
            out += sentences[s].tags[i];
            out += '\n';
        }
    }
    return out;
}

std::vector<TypingInstance> extract_mentions(const LabeledSentence& s, std::size_t sentence_index) {
    if (s.tokens.size() != s.tags.size() || s.tokens.empty())
        throw ConfigError("labeled sentence violates its invariants");

    std::vector<TypingInstance> out;
    std::size_t run_start = 0;
    std::string run_label;
    bool in_run = false;

    auto close = [&](std::size_t end) {
        out.push_back({s.tokens, run_start, end, run_label, sentence_index});
        in_run = false;
    };

    for (std::size_t i = 0; i < s.tags.size(); ++i) {
        const std::string& tag = s.tags[i];
        if (tag == "O") {
            if (in_run) close(i - 1);
        } else if (tag[0] == 'B') {
            if (in_run) close(i - 1);
            run_start = i;
            run_label = tag.substr(2);
            in_run = true;
        } else {
            // I- continues the current run. parse_conll repairs orphan I-
            // tags, but hand-built sentences get the same treatment here.
            std::string label = tag.substr(2);
            if (!in_run || label != run_label) {
                if (in_run) close(i - 1);
                run_start = i;
                run_label = std::move(label);
                in_run = true;
            }
        }
    }
    if (in_run) close(s.tags.size() - 1);
    return out;
}

std::vector<TypingInstance> extract_all_mentions(std::span<const LabeledSentence> sentences) {
    std::vector<TypingInstance> out;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        auto per = extract_mentions(sentences[i], i);
        out.insert(out.end(), per.begin(), per.end());
    }
    return out;
}

LabelSet build_label_set(std::span<const TypingInstance> instances) {
    if (instances.empty()) throw EmptyCorpusError("no typing instances to build a label set from");
    std::vector<std::string> names;
    std::unordered_set<std::string_view> seen;
    for (const auto& inst : instances)
        if (seen.insert(inst.label).second) names.push_back(inst.label);
    return LabelSet(std::move(names));
}

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace fewtype::corpus
