#include "fewtype/tiny_backend.hpp"

#include <cmath>
#include <random>

namespace fewtype::backend {

WordTokenizer::WordTokenizer(const std::vector<std::string>& words) {
    words_ = {"<pad>", "<unk>", "<mask>"};
    for (const auto& w : words) {
        if (w.empty() || w.find(' ') != std::string::npos || w.find('\t') != std::string::npos)
            throw ConfigError("vocabulary word '" + w + "' is empty or contains whitespace");
        if (ids_.count(w) || w == "<pad>" || w == "<unk>" || w == "<mask>") continue;
        ids_.emplace(w, static_cast<int>(words_.size()));
        words_.push_back(w);
    }
}

std::vector<int> WordTokenizer::encode(std::string_view text) const {
    std::vector<int> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\n')) ++i;
        std::size_t start = i;
        while (i < text.size() && text[i] != ' ' && text[i] != '\t' && text[i] != '\n') ++i;
        if (i > start) {
            auto it = ids_.find(text.substr(start, i - start));
            out.push_back(it == ids_.end() ? kUnkId : it->second);
        }
    }
    return out;
}

std::optional<int> WordTokenizer::single_token_id(std::string_view word) const {
    auto ids = encode(word);
    if (ids.size() != 1 || ids[0] == kUnkId) return std::nullopt;
    return ids[0];
}

namespace {

// Deterministic unit normal (Box-Muller over raw mt19937_64 draws); avoids
// the implementation-defined std::normal_distribution.
class NormalSource {
public:
    explicit NormalSource(std::uint64_t seed) : engine_(seed) {}
    double next() {
        double u1 = unit();
        double u2 = unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    double unit() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
    std::mt19937_64 engine_;
};

constexpr const char* kEmbedding = "embedding";
constexpr const char* kEncW = "enc_w";
constexpr const char* kEncB = "enc_b";
constexpr const char* kHeadW = "head_w";
constexpr const char* kHeadB = "head_b";

}  // namespace

TinyBackend::TinyBackend(const std::vector<std::string>& vocab_words, TinyBackendConfig cfg)
    : tokenizer_(vocab_words), cfg_(cfg) {
    if (cfg_.hidden_dim == 0) throw ConfigError("hidden_dim must be positive");
    if (cfg_.max_seq_len < 8) throw ConfigError("max_seq_len must be at least 8");
    spec_.vocab_size = tokenizer_.vocab_size();
    spec_.hidden_dim = cfg_.hidden_dim;
    spec_.max_seq_len = cfg_.max_seq_len;
    spec_.mask_token_id = WordTokenizer::kMaskId;
}

ParamSet TinyBackend::init_params(std::uint64_t seed) const {
    const std::size_t v = spec_.vocab_size;
    const std::size_t d = spec_.hidden_dim;
    NormalSource normal(seed);
    ParamSet p;
    p[kEmbedding] = Array::zeros({v, d});
    p[kEncB] = Array::zeros({d});
    p[kEncW] = Array::zeros({d, d});
    p[kHeadB] = Array::zeros({d});
    p[kHeadW] = Array::zeros({d, d});
    // Fill in name order so the draw sequence matches the map layout.
    for (auto& [name, arr] : p) {
        double s = (name == kEmbedding) ? cfg_.embed_init : cfg_.dense_init;
        for (double& x : arr.data) x = s * normal.next();
    }
    return p;
}

void TinyBackend::check_params(const ParamSet& params) const {
    const std::size_t v = spec_.vocab_size;
    const std::size_t d = spec_.hidden_dim;
    auto need = [&](const char* name, std::vector<std::size_t> shape) {
        auto it = params.find(name);
        if (it == params.end() || it->second.shape != shape)
            throw DimensionMismatchError(std::string("parameter '") + name +
                                         "' missing or mis-shaped for this backend");
    };
    need(kEmbedding, {v, d});
    need(kEncW, {d, d});
    need(kEncB, {d});
    need(kHeadW, {d, d});
    need(kHeadB, {d});
}

std::vector<double> TinyBackend::encode(const prompting::PromptedInput& input,
                                        const ParamSet& params) const {
    check_params(params);
    const std::size_t d = spec_.hidden_dim;
    if (input.token_ids.empty()) throw DimensionMismatchError("empty prompt");
    if (input.token_ids.size() > spec_.max_seq_len)
        throw SequenceTooLongError(input.token_ids.size(), spec_.max_seq_len);
    if (input.mask_position >= input.token_ids.size())
        throw DimensionMismatchError("mask position outside the prompt");

    const auto& emb = params.at(kEmbedding);
    std::vector<double> c(d, 0.0);
    for (int id : input.token_ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= spec_.vocab_size)
            throw DimensionMismatchError("token id outside the vocabulary");
        const double* row = emb.data.data() + static_cast<std::size_t>(id) * d;
        for (std::size_t j = 0; j < d; ++j) c[j] += row[j];
    }
    const double inv_t = 1.0 / static_cast<double>(input.token_ids.size());
    for (double& x : c) x *= inv_t;

    const auto& enc_w = params.at(kEncW);
    const auto& enc_b = params.at(kEncB);
    std::vector<double> h(d);
    for (std::size_t i = 0; i < d; ++i) {
        double acc = enc_b.data[i];
        const double* row = enc_w.data.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) acc += row[j] * c[j];
        h[i] = std::tanh(acc);
    }
    return h;
}

std::vector<double> TinyBackend::word_distribution(std::span<const double> h,
                                                   const ParamSet& params) const {
    check_params(params);
    prompting::MlmHeadView head{params.at(kHeadW).data, params.at(kHeadB).data,
                                params.at(kEmbedding).data, spec_.hidden_dim, spec_.vocab_size};
    return prompting::word_distribution(h, head);
}

struct TinyBackend::Forward {
    std::vector<double> c, h, g, p, q;
    double inv_t = 0.0;
    double loss = 0.0;
};

TinyBackend::Forward TinyBackend::forward_one(const ParamSet& params, const PromptTarget& item,
                                              const prompting::BoundVerbalizer& verbalizer,
                                              const corpus::LabelSet& labels,
                                              const LossOpts& opts) const {
    const std::size_t d = spec_.hidden_dim;
    const std::size_t v = spec_.vocab_size;
    if (item.target.size() != labels.size())
        throw DimensionMismatchError("target distribution size differs from the label set");

    Forward f;
    f.inv_t = 1.0 / static_cast<double>(item.input.token_ids.size());
    f.h = encode(item.input, params);

    // Mean-pooled context is recomputed for the backward pass.
    const auto& emb = params.at(kEmbedding);
    f.c.assign(d, 0.0);
    for (int id : item.input.token_ids) {
        const double* row = emb.data.data() + static_cast<std::size_t>(id) * d;
        for (std::size_t j = 0; j < d; ++j) f.c[j] += row[j];
    }
    for (double& x : f.c) x *= f.inv_t;

    const auto& head_w = params.at(kHeadW);
    const auto& head_b = params.at(kHeadB);
    f.g.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        double acc = head_b.data[i];
        const double* row = head_w.data.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) acc += row[j] * f.h[j];
        f.g[i] = std::tanh(acc);
    }

    f.p.resize(v);
    for (std::size_t w = 0; w < v; ++w) {
        double acc = 0.0;
        const double* row = emb.data.data() + w * d;
        for (std::size_t j = 0; j < d; ++j) acc += row[j] * f.g[j];
        f.p[w] = acc;
    }
    prompting::softmax_inplace(f.p);
    f.q = prompting::label_distribution(f.p, verbalizer, labels);

    f.loss = 0.0;
    for (std::size_t y = 0; y < labels.size(); ++y) {
        double t = item.target[y];
        if (opts.literal_kl) {
            f.loss += f.q[y] * (std::log(f.q[y]) - std::log(t));
        } else if (t > 0.0) {
            f.loss += t * (std::log(t) - std::log(f.q[y]));
        }
    }
    return f;
}

double TinyBackend::loss(const ParamSet& params, std::span<const PromptTarget> batch,
                         const prompting::BoundVerbalizer& verbalizer,
                         const corpus::LabelSet& labels, const LossOpts& opts) const {
    if (batch.empty()) throw ConfigError("loss over an empty batch");
    double total = 0.0;
    for (const auto& item : batch) total += forward_one(params, item, verbalizer, labels, opts).loss;
    total /= static_cast<double>(batch.size());
    if (!std::isfinite(total)) throw NonFiniteLossError();
    return total;
}

LossGrad TinyBackend::loss_and_grad(const ParamSet& params, std::span<const PromptTarget> batch,
                                    const prompting::BoundVerbalizer& verbalizer,
                                    const corpus::LabelSet& labels, const LossOpts& opts) const {
    if (batch.empty()) throw ConfigError("loss_and_grad over an empty batch");
    check_params(params);
    const std::size_t d = spec_.hidden_dim;
    const std::size_t v = spec_.vocab_size;
    const std::size_t n_labels = labels.size();

    LossGrad out;
    out.grad = zeros_like(params);
    auto& g_emb = out.grad.at(kEmbedding).data;
    auto& g_enc_w = out.grad.at(kEncW).data;
    auto& g_enc_b = out.grad.at(kEncB).data;
    auto& g_head_w = out.grad.at(kHeadW).data;
    auto& g_head_b = out.grad.at(kHeadB).data;
    const auto& emb = params.at(kEmbedding).data;
    const auto& enc_w = params.at(kEncW).data;
    const auto& head_w = params.at(kHeadW).data;

    std::vector<double> dq(n_labels), ds(n_labels), dp(v), dz(v), dg(d), du(d), dh(d), da(d),
        dc(d);

    for (const auto& item : batch) {
        Forward f = forward_one(params, item, verbalizer, labels, opts);
        out.loss += f.loss;

        // d loss / d label distribution.
        for (std::size_t y = 0; y < n_labels; ++y) {
            double t = item.target[y];
            if (opts.literal_kl)
                dq[y] = std::log(f.q[y]) - std::log(t) + 1.0;
            else
                dq[y] = (t > 0.0) ? -t / f.q[y] : 0.0;
        }

        // Through the score renormalization q = s / sum(s):
        // dl/ds_j = (dq_j - sum_y dq_y q_y) / sum(s).
        double s_sum = 0.0;
        for (std::size_t y = 0; y < n_labels; ++y) {
            const auto& words = verbalizer.per_label()[y];
            double acc = 0.0;
            for (const auto& e : words) acc += e.weight * f.p[static_cast<std::size_t>(e.token_id)];
            s_sum += acc / static_cast<double>(words.size());
        }
        double mix = 0.0;
        for (std::size_t y = 0; y < n_labels; ++y) mix += dq[y] * f.q[y];
        for (std::size_t y = 0; y < n_labels; ++y) ds[y] = (dq[y] - mix) / s_sum;

        // Into the vocabulary distribution.
        std::fill(dp.begin(), dp.end(), 0.0);
        for (std::size_t y = 0; y < n_labels; ++y) {
            const auto& words = verbalizer.per_label()[y];
            double scale = ds[y] / static_cast<double>(words.size());
            for (const auto& e : words) dp[static_cast<std::size_t>(e.token_id)] += scale * e.weight;
        }

        // Softmax backward.
        double dot = 0.0;
        for (std::size_t w = 0; w < v; ++w) dot += f.p[w] * dp[w];
        for (std::size_t w = 0; w < v; ++w) dz[w] = f.p[w] * (dp[w] - dot);

        // Output projection (tied embedding) and head nonlinearity.
        std::fill(dg.begin(), dg.end(), 0.0);
        for (std::size_t w = 0; w < v; ++w) {
            const double* row = emb.data() + w * d;
            double* grow = g_emb.data() + w * d;
            for (std::size_t j = 0; j < d; ++j) {
                dg[j] += dz[w] * row[j];
                grow[j] += dz[w] * f.g[j];
            }
        }
        for (std::size_t i = 0; i < d; ++i) du[i] = (1.0 - f.g[i] * f.g[i]) * dg[i];
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            const double* row = head_w.data() + i * d;
            double* grow = g_head_w.data() + i * d;
            for (std::size_t j = 0; j < d; ++j) {
                grow[j] += du[i] * f.h[j];
                dh[j] += du[i] * row[j];
            }
            g_head_b[i] += du[i];
        }

        // Encoder layer.
        for (std::size_t i = 0; i < d; ++i) da[i] = (1.0 - f.h[i] * f.h[i]) * dh[i];
        std::fill(dc.begin(), dc.end(), 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            const double* row = enc_w.data() + i * d;
            double* grow = g_enc_w.data() + i * d;
            for (std::size_t j = 0; j < d; ++j) {
                grow[j] += da[i] * f.c[j];
                dc[j] += da[i] * row[j];
            }
            g_enc_b[i] += da[i];
        }

        // Mean pooling back into the input embeddings.
        for (int id : item.input.token_ids) {
            double* grow = g_emb.data() + static_cast<std::size_t>(id) * d;
            for (std::size_t j = 0; j < d; ++j) grow[j] += f.inv_t * dc[j];
        }
    }

    double inv_b = 1.0 / static_cast<double>(batch.size());
    out.loss *= inv_b;
    scale(out.grad, inv_b);

    if (opts.freeze_head) {
        std::fill(g_head_w.begin(), g_head_w.end(), 0.0);
        std::fill(g_head_b.begin(), g_head_b.end(), 0.0);
    }
    if (!std::isfinite(out.loss) || !all_finite(out.grad)) throw NonFiniteLossError();
    return out;
}

}  // namespace fewtype::backend
