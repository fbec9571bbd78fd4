#include "fewtype/prompting.hpp"

#include <algorithm>
#include <cmath>

#include "fewtype/errors.hpp"

namespace fewtype::prompting {

Template::Template(std::string pattern) : pattern_(std::move(pattern)) {
    std::size_t pos = 0;
    std::size_t mask_count = 0;
    std::size_t mention_count = 0;
    std::string literal;

    auto flush_literal = [&] {
        if (!literal.empty()) {
            segments_.push_back({SegmentKind::literal, literal});
            literal.clear();
        }
    };

    while (pos < pattern_.size()) {
        if (pattern_[pos] == '{') {
            std::size_t close = pattern_.find('}', pos);
            if (close == std::string::npos) throw BadTemplateError("unterminated '{'");
            std::string_view name(pattern_.data() + pos + 1, close - pos - 1);
            flush_literal();
            if (name == "x") {
                segments_.push_back({SegmentKind::sentence, {}});
            } else if (name == "m") {
                segments_.push_back({SegmentKind::mention, {}});
                ++mention_count;
            } else if (name == "MASK") {
                segments_.push_back({SegmentKind::mask, {}});
                ++mask_count;
            } else {
                throw BadTemplateError("unknown placeholder {" + std::string(name) + "}");
            }
            pos = close + 1;
        } else {
            literal += pattern_[pos++];
        }
    }
    flush_literal();

    if (mask_count != 1)
        throw BadTemplateError("pattern must contain exactly one {MASK}, found " +
                               std::to_string(mask_count));
    if (mention_count == 0) throw BadTemplateError("pattern must contain {m} at least once");
}

PromptedInput apply_template(const TypingInstance& inst, const Template& tpl,
                             const Tokenizer& tokenizer, std::size_t max_seq_len) {
    struct Piece {
        std::vector<int> ids;
        bool truncatable = false;
        bool is_mask = false;
    };
    std::vector<Piece> pieces;
    std::size_t total = 0;

    for (const auto& seg : tpl.segments()) {
        Piece p;
        switch (seg.kind) {
            case Template::SegmentKind::literal:
                p.ids = tokenizer.encode(seg.text);
                break;
            case Template::SegmentKind::sentence:
                p.ids = tokenizer.encode(inst.sentence_text());
                p.truncatable = true;
                break;
            case Template::SegmentKind::mention:
                p.ids = tokenizer.encode(inst.surface());
                break;
            case Template::SegmentKind::mask:
                p.ids = {tokenizer.mask_id()};
                p.is_mask = true;
                break;
        }
        total += p.ids.size();
        pieces.push_back(std::move(p));
    }

    // Trim {x} expansions from their tail, last occurrence first.
    if (total > max_seq_len) {
        for (auto it = pieces.rbegin(); it != pieces.rend() && total > max_seq_len; ++it) {
            if (!it->truncatable) continue;
            std::size_t drop = std::min(it->ids.size(), total - max_seq_len);
            it->ids.resize(it->ids.size() - drop);
            total -= drop;
        }
        if (total > max_seq_len)
            throw MentionTooLongError("template and mention need " + std::to_string(total) +
                                      " tokens, max_seq_len is " + std::to_string(max_seq_len));
    }

    PromptedInput out;
    out.instance_ref = inst.id();
    out.token_ids.reserve(total);
    for (const auto& p : pieces) {
        if (p.is_mask) out.mask_position = out.token_ids.size();
        out.token_ids.insert(out.token_ids.end(), p.ids.begin(), p.ids.end());
    }
    return out;
}

namespace {

double parse_weight(std::string_view s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        double w = std::stod(std::string(s), &used);
        if (used != s.size() || !(w > 0.0))
            throw MalformedLineError(line_no, "weight must be a positive number");
        return w;
    } catch (const MalformedLineError&) {
        throw;
    } catch (const std::exception&) {
        throw MalformedLineError(line_no, "weight must be a positive number");
    }
}

}  // namespace

Verbalizer parse_verbalizer(std::string_view text) {
    Verbalizer out;
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

        std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw MalformedLineError(line_no, "expected '<label>\\t<words>'");
        std::string label(line.substr(0, tab));
        std::string_view rest = line.substr(tab + 1);
        if (label.empty() || rest.empty())
            throw MalformedLineError(line_no, "empty label or word list");

        auto& entries = out.entries[label];
        std::size_t start = 0;
        while (start <= rest.size()) {
            std::size_t comma = rest.find(',', start);
            if (comma == std::string_view::npos) comma = rest.size();
            std::string_view item = rest.substr(start, comma - start);
            start = comma + 1;
            if (item.empty()) throw MalformedLineError(line_no, "empty word entry");
            std::size_t colon = item.find(':');
            Verbalizer::Entry e;
            if (colon == std::string_view::npos) {
                e.word = std::string(item);
            } else {
                e.word = std::string(item.substr(0, colon));
                e.weight = parse_weight(item.substr(colon + 1), line_no);
            }
            if (e.word.empty()) throw MalformedLineError(line_no, "empty word entry");
            entries.push_back(std::move(e));
            if (comma == rest.size()) break;
        }
    }
    return out;
}

Verbalizer identity_verbalizer(const LabelSet& labels) {
    Verbalizer v;
    for (const auto& name : labels.names()) v.entries[name] = {{corpus::lowercase(name), 1.0}};
    return v;
}

std::string format_verbalizer(const Verbalizer& v) {
    std::string out;
    for (const auto& [label, entries] : v.entries) {
        out += label;
        out += '\t';
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (i > 0) out += ',';
            out += entries[i].word;
            if (entries[i].weight != 1.0) out += ':' + std::to_string(entries[i].weight);
        }
        out += '\n';
    }
    return out;
}

BoundVerbalizer::BoundVerbalizer(const Verbalizer& v, const Tokenizer& tokenizer,
                                 const LabelSet& labels) {
    per_label_.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = v.entries.find(labels.name(i));
        if (it == v.entries.end() || it->second.empty())
            throw ConfigError("verbalizer has no words for label '" + labels.name(i) + "'");
        for (const auto& entry : it->second) {
            auto id = tokenizer.single_token_id(entry.word);
            if (!id) throw UnknownWordError(entry.word);
            if (!(entry.weight > 0.0))
                throw ConfigError("verbalizer weight for '" + entry.word + "' must be positive");
            per_label_[i].push_back({*id, entry.weight});
        }
    }
}

void softmax_inplace(std::vector<double>& logits) {
    double max = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - max);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

std::vector<double> word_distribution(std::span<const double> h, const MlmHeadView& head) {
    const std::size_t d = head.hidden_dim;
    const std::size_t vocab = head.vocab_size;
    if (h.size() != d || head.w1.size() != d * d || head.b1.size() != d ||
        head.embedding.size() != vocab * d)
        throw DimensionMismatchError("mlm head shapes do not match hidden representation");

    std::vector<double> g(d);
    for (std::size_t i = 0; i < d; ++i) {
        double acc = head.b1[i];
        for (std::size_t j = 0; j < d; ++j) acc += head.w1[i * d + j] * h[j];
        g[i] = std::tanh(acc);
    }
    std::vector<double> logits(vocab);
    for (std::size_t w = 0; w < vocab; ++w) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += head.embedding[w * d + j] * g[j];
        logits[w] = acc;
    }
    softmax_inplace(logits);
    return logits;
}

std::vector<double> label_distribution(std::span<const double> word_probs,
                                       const BoundVerbalizer& verbalizer, const LabelSet& labels) {
    if (verbalizer.n_labels() != labels.size())
        throw DimensionMismatchError("verbalizer was bound to a different label set");

    std::vector<double> scores(labels.size(), 0.0);
    for (std::size_t y = 0; y < labels.size(); ++y) {
        const auto& words = verbalizer.per_label()[y];
        double acc = 0.0;
        for (const auto& entry : words) {
            if (static_cast<std::size_t>(entry.token_id) >= word_probs.size())
                throw DimensionMismatchError("verbalizer token id outside the vocabulary");
            acc += entry.weight * word_probs[entry.token_id];
        }
        scores[y] = acc / static_cast<double>(words.size());
    }

    double total = 0.0;
    for (double s : scores) total += s;
    if (total <= 0.0)  // degenerate input: fall back to uniform
        return std::vector<double>(labels.size(), 1.0 / static_cast<double>(labels.size()));
    for (double& s : scores) s /= total;
    return scores;
}

}  // namespace fewtype::prompting
