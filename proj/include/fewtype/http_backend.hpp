#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "fewtype/backend.hpp"

namespace httplib {
class Server;
}

namespace fewtype::backend {

/// Adapter for a full-scale masked-LM served out of process (a pretrained
/// transformer wrapped by a small model server). Configured by base URL and
/// model name; the JSON protocol is documented in the README and mirrored by
/// serve_backend() below. Parameter sets are uploaded once and addressed by
/// content fingerprint afterwards, so repeated calls under the same params
/// stay cheap.
class HttpBackend final : public Backend {
public:
    HttpBackend(std::string base_url, std::string model_name);
    ~HttpBackend() override;

    const BackendSpec& spec() const override { return spec_; }
    const prompting::Tokenizer& tokenizer() const override;
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

    const std::string& model_name() const { return model_name_; }

private:
    class RemoteTokenizer;
    struct Client;

    std::string params_ref(const ParamSet& params) const;

    std::string base_url_;
    std::string model_name_;
    BackendSpec spec_;
    std::unique_ptr<Client> client_;
    std::unique_ptr<RemoteTokenizer> tokenizer_;
    mutable std::mutex ref_mutex_;
    mutable std::unordered_map<std::string, std::string> ref_cache_;  // fingerprint -> ref
};

/// Expose a local backend over the same protocol HttpBackend speaks. Used by
/// the test suite to exercise the adapter and usable as a reference when
/// implementing a real model server.
void serve_backend(const Backend& backend, const std::string& model_name,
                   httplib::Server& server);

}  // namespace fewtype::backend
