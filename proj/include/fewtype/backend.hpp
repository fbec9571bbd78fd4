#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fewtype/corpus.hpp"
#include "fewtype/prompting.hpp"

namespace fewtype::backend {

/// Dense row-major array, rank 1 or 2. All backend parameters and gradients
/// are carried in these.
struct Array {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    static Array zeros(std::vector<std::size_t> shape);
    std::size_t numel() const;
    bool same_shape(const Array& o) const { return shape == o.shape; }
};

/// Named parameter collection (theta, phi, gradients). Plain value type:
/// copying a ParamSet is the functional update primitive MAML relies on.
using ParamSet = std::map<std::string, Array>;

struct BackendSpec {
    std::size_t vocab_size = 0;
    std::size_t hidden_dim = 0;
    std::size_t max_seq_len = 128;
    int mask_token_id = 0;
};

/// One training example: a tokenized prompt and its target label
/// distribution (one-hot unless smoothing is enabled).
struct PromptTarget {
    prompting::PromptedInput input;
    std::vector<double> target;
};

struct LossOpts {
    /// Use the divergence of the prediction from the target instead of the
    /// default (target from prediction). Only meaningful for soft targets.
    bool literal_kl = false;
    /// Keep the masked-word head fixed; the shared embedding still trains.
    bool freeze_head = false;
};

struct LossGrad {
    double loss = 0.0;
    ParamSet grad;
};

/// params - lr * grad, elementwise, as a fresh ParamSet. Inputs are left
/// untouched. Throws DimensionMismatchError when names or shapes differ.
ParamSet apply_update(const ParamSet& params, const ParamSet& grad, double lr);

/// acc += a * x over matching entries (same name/shape contract).
void axpy(ParamSet& acc, double a, const ParamSet& x);
void scale(ParamSet& p, double a);
ParamSet zeros_like(const ParamSet& p);
double inf_norm(const ParamSet& p);
bool all_finite(const ParamSet& p);

/// A masked-language-model encoder plus word head with functional parameter
/// access. Parameter values travel exclusively through ParamSets so callers
/// can hold theta and any number of adapted variants at once.
class Backend {
public:
    virtual ~Backend() = default;

    virtual const BackendSpec& spec() const = 0;
    virtual const prompting::Tokenizer& tokenizer() const = 0;

    /// Fresh parameters drawn deterministically from the seed.
    virtual ParamSet init_params(std::uint64_t seed) const = 0;

    /// Hidden representation at the prompt's mask position. Deterministic;
    /// inference runs with no stochastic regularization.
    virtual std::vector<double> encode(const prompting::PromptedInput& input,
                                       const ParamSet& params) const = 0;

    /// Vocabulary distribution for a mask representation under these params.
    virtual std::vector<double> word_distribution(std::span<const double> h,
                                                  const ParamSet& params) const = 0;

    /// Mean divergence loss over the batch and its gradient with respect to
    /// every parameter. Throws NonFiniteLossError on divergence.
    virtual LossGrad loss_and_grad(const ParamSet& params, std::span<const PromptTarget> batch,
                                   const prompting::BoundVerbalizer& verbalizer,
                                   const corpus::LabelSet& labels,
                                   const LossOpts& opts = {}) const = 0;

    /// Forward-only batch loss. Default delegates to loss_and_grad.
    virtual double loss(const ParamSet& params, std::span<const PromptTarget> batch,
                        const prompting::BoundVerbalizer& verbalizer,
                        const corpus::LabelSet& labels, const LossOpts& opts = {}) const;

    /// Hessian-vector product of the batch loss at `params` with `vec`.
    /// Default implementation differences the gradient centrally; exact
    /// second-order meta updates are built on this.
    virtual ParamSet hessian_vector(const ParamSet& params, std::span<const PromptTarget> batch,
                                    const prompting::BoundVerbalizer& verbalizer,
                                    const corpus::LabelSet& labels, const ParamSet& vec,
                                    const LossOpts& opts = {}) const;
};

/// Checkpoint directory layout: manifest.json (names, shapes, backend spec)
/// plus one raw little-endian float32 file per parameter.
void save_checkpoint(const std::filesystem::path& dir, const ParamSet& params,
                     const BackendSpec& spec);

struct Checkpoint {
    ParamSet params;
    BackendSpec spec;
};
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace fewtype::backend
