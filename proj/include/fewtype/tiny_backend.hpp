#pragma once

#include <string>
#include <vector>

#include "fewtype/backend.hpp"

namespace fewtype::backend {

/// Whitespace word-level tokenizer over a fixed vocabulary. Ids 0..2 are the
/// <pad>, <unk> and <mask> specials; out-of-vocabulary words map to <unk>.
class WordTokenizer final : public prompting::Tokenizer {
public:
    explicit WordTokenizer(const std::vector<std::string>& words);

    std::vector<int> encode(std::string_view text) const override;
    std::optional<int> single_token_id(std::string_view word) const override;
    int mask_id() const override { return kMaskId; }
    std::size_t vocab_size() const override { return words_.size(); }

    const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
    static constexpr int kPadId = 0;
    static constexpr int kUnkId = 1;
    static constexpr int kMaskId = 2;

private:
    std::vector<std::string> words_;
    std::map<std::string, int, std::less<>> ids_;
};

struct TinyBackendConfig {
    std::size_t hidden_dim = 32;
    std::size_t max_seq_len = 128;
    /// Initialization scales. The embedding doubles as the output projection;
    /// it starts wide so plain gradient descent separates the verbalizer
    /// words quickly at desk-scale learning rates.
    double embed_init = 2.5;
    double dense_init = 0.3;
};

/// Trainable reference model small enough for exhaustive desk-scale checks:
/// mean-pooled word embeddings, one tanh mixing layer, and the masked-word
/// head from prompting::word_distribution with the embedding matrix tied as
/// output projection.
///
/// Parameters: "embedding" (V x d), "enc_w" (d x d), "enc_b" (d),
/// "head_w" (d x d), "head_b" (d).
class TinyBackend final : public Backend {
public:
    TinyBackend(const std::vector<std::string>& vocab_words, TinyBackendConfig cfg = {});

    const BackendSpec& spec() const override { return spec_; }
    const prompting::Tokenizer& tokenizer() const override { return tokenizer_; }
    ParamSet init_params(std::uint64_t seed) const override;

    std::vector<double> encode(const prompting::PromptedInput& input,
                               const ParamSet& params) const override;
    std::vector<double> word_distribution(std::span<const double> h,
                                          const ParamSet& params) const override;
    LossGrad loss_and_grad(const ParamSet& params, std::span<const PromptTarget> batch,
                           const prompting::BoundVerbalizer& verbalizer,
                           const corpus::LabelSet& labels,
                           const LossOpts& opts = {}) const override;
    double loss(const ParamSet& params, std::span<const PromptTarget> batch,
                const prompting::BoundVerbalizer& verbalizer, const corpus::LabelSet& labels,
                const LossOpts& opts = {}) const override;

private:
    struct Forward;
    Forward forward_one(const ParamSet& params, const PromptTarget& item,
                        const prompting::BoundVerbalizer& verbalizer,
                        const corpus::LabelSet& labels, const LossOpts& opts) const;
    void check_params(const ParamSet& params) const;

    WordTokenizer tokenizer_;
    BackendSpec spec_;
    TinyBackendConfig cfg_;
};

}  // namespace fewtype::backend
