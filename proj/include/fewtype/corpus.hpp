#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fewtype/errors.hpp"

namespace fewtype::corpus {

/// One BIO-tagged sentence. Equality ignores provenance so that a
/// parse -> serialize -> parse round trip compares equal.
struct LabeledSentence {
    std::vector<std::string> tokens;
    std::vector<std::string> tags;
    std::size_t first_line = 0;  // 1-based line of the first token, 0 if synthetic

    bool operator==(const LabeledSentence& o) const {
        return tokens == o.tokens && tags == o.tags;
    }
};

/// Identity of a mention inside a corpus: which sentence, which span.
struct InstanceId {
    std::size_t sentence = 0;
    std::size_t span_start = 0;
    std::size_t span_end = 0;

    auto operator<=>(const InstanceId&) const = default;
    std::string str() const {
        return std::to_string(sentence) + ":" + std::to_string(span_start) + ":" +
               std::to_string(span_end);
    }
};

/// A sentence with one marked mention span and its gold entity category.
/// Spans are token indices, inclusive on both ends.
struct TypingInstance {
    std::vector<std::string> tokens;
    std::size_t span_start = 0;
    std::size_t span_end = 0;
    std::string label;
    std::size_t sentence_index = 0;  // position of the source sentence in its corpus

    InstanceId id() const { return {sentence_index, span_start, span_end}; }

    /// Mention surface form: the span tokens joined with single spaces.
    std::string surface() const;
    /// Sentence surface form: all tokens joined with single spaces.
    std::string sentence_text() const;
};

/// Ordered set of unique category names. The order is stable for a run and
/// defines the indexing of every label distribution.
class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(std::vector<std::string> names);

    std::size_t size() const { return names_.size(); }
    bool empty() const { return names_.empty(); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    const std::vector<std::string>& names() const { return names_; }

    bool contains(std::string_view label) const;
    /// Index of a label; throws UnknownLabelError if absent.
    std::size_t index_of(std::string_view label) const;

    bool operator==(const LabelSet&) const = default;

private:
    std::vector<std::string> names_;
};

enum class DiagnosticSeverity { warning, info };

/// Non-fatal findings produced while reading data (BIO repairs, duplicate
/// support surfaces, ...). Fatal problems are thrown as errors instead.
struct Diagnostic {
    DiagnosticSeverity severity = DiagnosticSeverity::warning;
    std::size_t line_no = 0;  // 0 when not tied to a source line
    std::string message;
};

struct ParsedCorpus {
    std::vector<LabeledSentence> sentences;
    std::vector<Diagnostic> diagnostics;
};

/// Parse token-per-line BIO text: "<token> <tag>" or "<token>\t<tag>", blank
/// line between sentences, "-DOCSTART-" lines ignored. An I- tag without a
/// compatible predecessor is repaired to B- and reported as a diagnostic.
///
/// Throws MalformedLineError for lines that do not split into two fields.
/// Does not throw on an empty corpus; callers that require sentences use
/// require_sentences().
ParsedCorpus parse_conll(std::string_view text);

/// Throws EmptyCorpusError when the parse produced no sentences.
const std::vector<LabeledSentence>& require_sentences(const ParsedCorpus& parsed);

/// Serialize sentences back to the CoNLL form accepted by parse_conll.
std::string to_conll(std::span<const LabeledSentence> sentences);

/// One instance per maximal B-/I- run of a single label, ordered by span
/// start. `sentence_index` is recorded into each instance's identity.
std::vector<TypingInstance> extract_mentions(const LabeledSentence& s,
                                             std::size_t sentence_index = 0);

/// extract_mentions over a whole corpus, numbering sentences in order.
std::vector<TypingInstance> extract_all_mentions(std::span<const LabeledSentence> sentences);

/// Unique instance labels in first-appearance order. Throws EmptyCorpusError
/// on an empty instance sequence.
LabelSet build_label_set(std::span<const TypingInstance> instances);

/// Lowercased (ASCII) copy, the deduplication key for mention surfaces.
std::string lowercase(std::string_view s);

}  // namespace fewtype::corpus
