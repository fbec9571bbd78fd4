#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fewtype/corpus.hpp"

namespace fewtype::prompting {

using corpus::InstanceId;
using corpus::LabelSet;
using corpus::TypingInstance;

/// Read-only view of a backend's tokenization. Implementations must be safe
/// for concurrent calls.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<int> encode(std::string_view text) const = 0;
    /// Vocabulary id of `word` iff it tokenizes to exactly one item.
    virtual std::optional<int> single_token_id(std::string_view word) const = 0;
    virtual int mask_id() const = 0;
    virtual std::size_t vocab_size() const = 0;
};

/// Prompt pattern with placeholders {x} (sentence), {m} (mention surface) and
/// exactly one {MASK}. Validated at construction.
class Template {
public:
    explicit Template(std::string pattern);

    const std::string& pattern() const { return pattern_; }

    enum class SegmentKind { literal, sentence, mention, mask };
    struct Segment {
        SegmentKind kind;
        std::string text;  // literal segments only
    };
    const std::vector<Segment>& segments() const { return segments_; }

private:
    std::string pattern_;
    std::vector<Segment> segments_;
};

/// A tokenized prompt ready for the backend. token_ids[mask_position] is the
/// backend's mask token.
struct PromptedInput {
    std::vector<int> token_ids;
    std::size_t mask_position = 0;
    InstanceId instance_ref;
};

/// Fill the template with the instance, tokenize and truncate. Tokens are
/// dropped from the end of the {x} expansion first; the mention copy and the
/// mask always survive. Throws MentionTooLongError when the template without
/// any {x} tokens already exceeds max_seq_len.
PromptedInput apply_template(const TypingInstance& inst, const Template& tpl,
                             const Tokenizer& tokenizer, std::size_t max_seq_len);

/// Per-label weighted word lists mapping vocabulary mass to label mass.
struct Verbalizer {
    struct Entry {
        std::string word;
        double weight = 1.0;
    };
    std::map<std::string, std::vector<Entry>> entries;  // label -> words
};

/// Parse "<label>\t<word>[:<weight>][,<word>[:<weight>]...]" lines. Repeated
/// labels accumulate entries. '#' starts a comment line.
Verbalizer parse_verbalizer(std::string_view text);

/// One word per label: the lowercased label name. The fallback when no
/// verbalizer file is configured.
Verbalizer identity_verbalizer(const LabelSet& labels);

std::string format_verbalizer(const Verbalizer& v);

/// A verbalizer resolved against a tokenizer and a label set: every word is
/// checked to be a single vocabulary item (UnknownWordError otherwise) and
/// every label must have at least one entry.
class BoundVerbalizer {
public:
    BoundVerbalizer() = default;
    BoundVerbalizer(const Verbalizer& v, const Tokenizer& tokenizer, const LabelSet& labels);

    struct BoundEntry {
        int token_id = 0;
        double weight = 1.0;
    };
    const std::vector<std::vector<BoundEntry>>& per_label() const { return per_label_; }
    std::size_t n_labels() const { return per_label_.size(); }

private:
    std::vector<std::vector<BoundEntry>> per_label_;  // indexed by label
};

/// Parameters of the masked-word head: logits = E * act(W1 * h + b1), with a
/// tanh nonlinearity and the embedding matrix as output projection.
struct MlmHeadView {
    std::span<const double> w1;  // hidden x hidden, row-major
    std::span<const double> b1;  // hidden
    std::span<const double> embedding;  // vocab x hidden, row-major
    std::size_t hidden_dim = 0;
    std::size_t vocab_size = 0;
};

/// Probability of every vocabulary word given the mask-position
/// representation: softmax over the head logits. Sums to 1 within 1e-6.
std::vector<double> word_distribution(std::span<const double> h, const MlmHeadView& head);

/// Map a vocabulary distribution to a label distribution: each label scores
/// the weighted mean of its words' probabilities, scores are renormalized to
/// sum to 1 (uniform fallback if every score is 0). Output follows LabelSet
/// order.
std::vector<double> label_distribution(std::span<const double> word_probs,
                                       const BoundVerbalizer& verbalizer, const LabelSet& labels);

/// Numerically stable in-place softmax helper shared by the backends.
void softmax_inplace(std::vector<double>& logits);

}  // namespace fewtype::prompting
