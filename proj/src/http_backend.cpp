#include "fewtype/http_backend.hpp"

#include <httplib.h>
#include <json.hpp>

namespace fewtype::backend {

using nlohmann::json;

namespace {

json array_to_json(const Array& arr) {
    return json{{"shape", arr.shape}, {"data", arr.data}};
}

Array array_from_json(const json& j) {
    Array arr;
    arr.shape = j.at("shape").get<std::vector<std::size_t>>();
    arr.data = j.at("data").get<std::vector<double>>();
    if (arr.data.size() != arr.numel())
        throw BackendProtocolError("array payload size does not match its shape");
    return arr;
}

json params_to_json(const ParamSet& params) {
    json out = json::object();
    for (const auto& [name, arr] : params) out[name] = array_to_json(arr);
    return out;
}

ParamSet params_from_json(const json& j) {
    ParamSet out;
    for (const auto& [name, value] : j.items()) out[name] = array_from_json(value);
    return out;
}

// FNV-1a over the parameter bytes; identifies a ParamSet for server-side
// reuse. Collisions would only stale-cache within one process run.
std::string fingerprint(const ParamSet& params) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& [name, arr] : params) {
        mix(name.data(), name.size());
        mix(arr.data.data(), arr.data.size() * sizeof(double));
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json verbalizer_to_json(const prompting::BoundVerbalizer& verbalizer) {
    json out = json::array();
    for (const auto& words : verbalizer.per_label()) {
        json per_label = json::array();
        for (const auto& e : words) per_label.push_back({{"id", e.token_id}, {"weight", e.weight}});
        out.push_back(std::move(per_label));
    }
    return out;
}

json batch_to_json(std::span<const PromptTarget> batch) {
    json out = json::array();
    for (const auto& item : batch)
        out.push_back({{"token_ids", item.input.token_ids},
                       {"mask_position", item.input.mask_position},
                       {"target", item.target}});
    return out;
}

}  // namespace

struct HttpBackend::Client {
    explicit Client(const std::string& base_url) : http(base_url) {
        http.set_read_timeout(600, 0);
        http.set_write_timeout(600, 0);
    }

    json get(const std::string& path) {
        auto res = http.Get(path);
        return unwrap(path, res);
    }

    json post(const std::string& path, const json& body) {
        auto res = http.Post(path, body.dump(), "application/json");
        return unwrap(path, res);
    }

    json unwrap(const std::string& path, const httplib::Result& res) {
        if (!res)
            throw BackendProtocolError("no response from model server for " + path + " (" +
                                       httplib::to_string(res.error()) + ")");
        if (res->status != 200)
            throw BackendProtocolError("model server returned HTTP " +
                                       std::to_string(res->status) + " for " + path + ": " +
                                       res->body);
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            throw BackendProtocolError("model server sent invalid JSON for " + path + ": " +
                                       e.what());
        }
    }

    httplib::Client http;
};

class HttpBackend::RemoteTokenizer final : public prompting::Tokenizer {
public:
    RemoteTokenizer(Client& client, const BackendSpec& spec) : client_(client), spec_(spec) {}

    std::vector<int> encode(std::string_view text) const override {
        {
            std::lock_guard lock(mutex_);
            auto it = encode_cache_.find(std::string(text));
            if (it != encode_cache_.end()) return it->second;
        }
        auto ids = client_.post("/tokenize", json{{"text", std::string(text)}})
                       .at("ids")
                       .get<std::vector<int>>();
        std::lock_guard lock(mutex_);
        encode_cache_.emplace(std::string(text), ids);
        return ids;
    }

    std::optional<int> single_token_id(std::string_view word) const override {
        auto res = client_.post("/single_token", json{{"word", std::string(word)}});
        if (res.at("id").is_null()) return std::nullopt;
        return res.at("id").get<int>();
    }

    int mask_id() const override { return spec_.mask_token_id; }
    std::size_t vocab_size() const override { return spec_.vocab_size; }

private:
    Client& client_;
    const BackendSpec& spec_;
    mutable std::mutex mutex_;
    mutable std::map<std::string, std::vector<int>> encode_cache_;
};

HttpBackend::HttpBackend(std::string base_url, std::string model_name)
    : base_url_(std::move(base_url)), model_name_(std::move(model_name)),
      client_(std::make_unique<Client>(base_url_)) {
    auto spec = client_->get("/spec");
    if (spec.contains("model") && spec.at("model").get<std::string>() != model_name_)
        throw BackendProtocolError("model server hosts '" +
                                   spec.at("model").get<std::string>() + "', expected '" +
                                   model_name_ + "'");
    spec_.vocab_size = spec.at("vocab_size").get<std::size_t>();
    spec_.hidden_dim = spec.at("hidden_dim").get<std::size_t>();
    spec_.max_seq_len = spec.at("max_seq_len").get<std::size_t>();
    spec_.mask_token_id = spec.at("mask_token_id").get<int>();
    if (spec_.vocab_size == 0 || spec_.hidden_dim == 0 || spec_.max_seq_len < 8 ||
        spec_.mask_token_id < 0 ||
        static_cast<std::size_t>(spec_.mask_token_id) >= spec_.vocab_size)
        throw BackendProtocolError("model server advertised an invalid spec");
    tokenizer_ = std::make_unique<RemoteTokenizer>(*client_, spec_);
}

HttpBackend::~HttpBackend() = default;

const prompting::Tokenizer& HttpBackend::tokenizer() const { return *tokenizer_; }

std::string HttpBackend::params_ref(const ParamSet& params) const {
    std::string fp = fingerprint(params);
    {
        std::lock_guard lock(ref_mutex_);
        auto it = ref_cache_.find(fp);
        if (it != ref_cache_.end()) return it->second;
    }
    auto res = client_->post("/params", json{{"fingerprint", fp}, {"params", params_to_json(params)}});
    std::string ref = res.at("ref").get<std::string>();
    std::lock_guard lock(ref_mutex_);
    if (ref_cache_.size() > 64) ref_cache_.clear();
    ref_cache_[fp] = ref;
    return ref;
}

ParamSet HttpBackend::init_params(std::uint64_t seed) const {
    auto res = client_->post("/init_params", json{{"seed", seed}});
    return params_from_json(res.at("params"));
}

std::vector<double> HttpBackend::encode(const prompting::PromptedInput& input,
                                        const ParamSet& params) const {
    auto res = client_->post("/encode", json{{"params_ref", params_ref(params)},
                                             {"token_ids", input.token_ids},
                                             {"mask_position", input.mask_position}});
    return res.at("h").get<std::vector<double>>();
}

std::vector<double> HttpBackend::word_distribution(std::span<const double> h,
                                                   const ParamSet& params) const {
    auto res = client_->post("/word_distribution",
                             json{{"params_ref", params_ref(params)},
                                  {"h", std::vector<double>(h.begin(), h.end())}});
    return res.at("p").get<std::vector<double>>();
}

LossGrad HttpBackend::loss_and_grad(const ParamSet& params, std::span<const PromptTarget> batch,
                                    const prompting::BoundVerbalizer& verbalizer,
                                    const corpus::LabelSet& labels, const LossOpts& opts) const {
    auto res = client_->post("/loss_and_grad",
                             json{{"params_ref", params_ref(params)},
                                  {"batch", batch_to_json(batch)},
                                  {"verbalizer", verbalizer_to_json(verbalizer)},
                                  {"n_labels", labels.size()},
                                  {"literal_kl", opts.literal_kl},
                                  {"freeze_head", opts.freeze_head}});
    LossGrad out;
    out.loss = res.at("loss").get<double>();
    out.grad = params_from_json(res.at("grad"));
    if (!std::isfinite(out.loss) || !all_finite(out.grad)) throw NonFiniteLossError();
    return out;
}

double HttpBackend::loss(const ParamSet& params, std::span<const PromptTarget> batch,
                         const prompting::BoundVerbalizer& verbalizer,
                         const corpus::LabelSet& labels, const LossOpts& opts) const {
    auto res = client_->post("/loss", json{{"params_ref", params_ref(params)},
                                           {"batch", batch_to_json(batch)},
                                           {"verbalizer", verbalizer_to_json(verbalizer)},
                                           {"n_labels", labels.size()},
                                           {"literal_kl", opts.literal_kl},
                                           {"freeze_head", opts.freeze_head}});
    double loss = res.at("loss").get<double>();
    if (!std::isfinite(loss)) throw NonFiniteLossError();
    return loss;
}

namespace {

// Shared state for one served backend: uploaded parameter sets by ref.
struct ServerState {
    const Backend* backend = nullptr;
    std::string model_name;
    std::mutex mutex;
    std::unordered_map<std::string, ParamSet> params_by_ref;
    std::size_t next_ref = 0;
};

// The served protocol reconstructs label sets positionally; names are not
// part of the objective, only the count is.
corpus::LabelSet positional_labels(std::size_t n) {
    std::vector<std::string> names;
    names.reserve(n);
    for (std::size_t i = 0; i < n; ++i) names.push_back("label_" + std::to_string(i));
    return corpus::LabelSet(std::move(names));
}

prompting::BoundVerbalizer verbalizer_from_json(const json& j, const Backend& backend,
                                                const corpus::LabelSet& labels) {
    // Round-trip through the textual verbalizer is impossible here (ids are
    // already resolved), so rebuild words from the tokenizer-independent id
    // form via a synthetic single-word-per-id tokenizer.
    struct IdTokenizer final : prompting::Tokenizer {
        std::size_t vocab = 0;
        int mask = 0;
        std::vector<int> encode(std::string_view text) const override {
            return {static_cast<int>(std::stol(std::string(text)))};
        }
        std::optional<int> single_token_id(std::string_view word) const override {
            int id = static_cast<int>(std::stol(std::string(word)));
            if (id < 0 || static_cast<std::size_t>(id) >= vocab) return std::nullopt;
            return id;
        }
        int mask_id() const override { return mask; }
        std::size_t vocab_size() const override { return vocab; }
    };
    IdTokenizer ids;
    ids.vocab = backend.spec().vocab_size;
    ids.mask = backend.spec().mask_token_id;

    prompting::Verbalizer v;
    std::size_t label_idx = 0;
    for (const auto& words : j) {
        auto& entries = v.entries[labels.name(label_idx)];
        for (const auto& w : words)
            entries.push_back({std::to_string(w.at("id").get<int>()), w.at("weight").get<double>()});
        ++label_idx;
    }
    if (label_idx != labels.size())
        throw BackendProtocolError("verbalizer label count differs from n_labels");
    return prompting::BoundVerbalizer(v, ids, labels);
}

std::vector<PromptTarget> batch_from_json(const json& j) {
    std::vector<PromptTarget> out;
    for (const auto& item : j) {
        PromptTarget t;
        t.input.token_ids = item.at("token_ids").get<std::vector<int>>();
        t.input.mask_position = item.at("mask_position").get<std::size_t>();
        t.target = item.at("target").get<std::vector<double>>();
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace

void serve_backend(const Backend& backend, const std::string& model_name,
                   httplib::Server& server) {
    auto state = std::make_shared<ServerState>();
    state->backend = &backend;
    state->model_name = model_name;

    auto reply = [](httplib::Response& res, const json& body) {
        res.set_content(body.dump(), "application/json");
    };
    auto fail = [](httplib::Response& res, int status, const std::string& message) {
        res.status = status;
        res.set_content(json{{"error", message}}.dump(), "application/json");
    };
    auto guarded = [fail](auto fn) {
        return [fn, fail](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const std::exception& e) {
                fail(res, 400, e.what());
            }
        };
    };
    auto lookup_params = [state](const json& body) -> ParamSet {
        std::string ref = body.at("params_ref").get<std::string>();
        std::lock_guard lock(state->mutex);
        auto it = state->params_by_ref.find(ref);
        if (it == state->params_by_ref.end())
            throw BackendProtocolError("unknown params_ref '" + ref + "'");
        return it->second;
    };

    server.Get("/spec", guarded([state, reply](const httplib::Request&, httplib::Response& res) {
        const auto& spec = state->backend->spec();
        reply(res, json{{"model", state->model_name},
                        {"vocab_size", spec.vocab_size},
                        {"hidden_dim", spec.hidden_dim},
                        {"max_seq_len", spec.max_seq_len},
                        {"mask_token_id", spec.mask_token_id}});
    }));

    server.Post("/tokenize", guarded([state, reply](const httplib::Request& req,
                                                    httplib::Response& res) {
        auto body = json::parse(req.body);
        reply(res, json{{"ids", state->backend->tokenizer().encode(
                                    body.at("text").get<std::string>())}});
    }));

    server.Post("/single_token", guarded([state, reply](const httplib::Request& req,
                                                        httplib::Response& res) {
        auto body = json::parse(req.body);
        auto id = state->backend->tokenizer().single_token_id(body.at("word").get<std::string>());
        reply(res, json{{"id", id ? json(*id) : json(nullptr)}});
    }));

    server.Post("/init_params", guarded([state, reply](const httplib::Request& req,
                                                       httplib::Response& res) {
        auto body = json::parse(req.body);
        auto params = state->backend->init_params(body.at("seed").get<std::uint64_t>());
        reply(res, json{{"params", params_to_json(params)}});
    }));

    server.Post("/params", guarded([state, reply](const httplib::Request& req,
                                                  httplib::Response& res) {
        auto body = json::parse(req.body);
        auto params = params_from_json(body.at("params"));
        std::lock_guard lock(state->mutex);
        std::string ref = "p" + std::to_string(state->next_ref++);
        state->params_by_ref.emplace(ref, std::move(params));
        if (state->params_by_ref.size() > 128) {
            // Drop the oldest half; clients re-upload on a miss.
            std::size_t cutoff = state->next_ref - 64;
            for (auto it = state->params_by_ref.begin(); it != state->params_by_ref.end();) {
                std::size_t n = std::stoull(it->first.substr(1));
                it = (n < cutoff) ? state->params_by_ref.erase(it) : std::next(it);
            }
        }
        reply(res, json{{"ref", ref}});
    }));

    server.Post("/encode", guarded([state, reply, lookup_params](const httplib::Request& req,
                                                                 httplib::Response& res) {
        auto body = json::parse(req.body);
        prompting::PromptedInput input;
        input.token_ids = body.at("token_ids").get<std::vector<int>>();
        input.mask_position = body.at("mask_position").get<std::size_t>();
        reply(res, json{{"h", state->backend->encode(input, lookup_params(body))}});
    }));

    server.Post("/word_distribution",
                guarded([state, reply, lookup_params](const httplib::Request& req,
                                                      httplib::Response& res) {
                    auto body = json::parse(req.body);
                    auto h = body.at("h").get<std::vector<double>>();
                    reply(res, json{{"p", state->backend->word_distribution(
                                              h, lookup_params(body))}});
                }));

    auto run_loss = [state, reply, lookup_params](const httplib::Request& req,
                                                  httplib::Response& res, bool with_grad) {
        auto body = json::parse(req.body);
        auto params = lookup_params(body);
        auto batch = batch_from_json(body.at("batch"));
        auto labels = positional_labels(body.at("n_labels").get<std::size_t>());
        auto verbalizer = verbalizer_from_json(body.at("verbalizer"), *state->backend, labels);
        LossOpts opts;
        opts.literal_kl = body.value("literal_kl", false);
        opts.freeze_head = body.value("freeze_head", false);
        if (with_grad) {
            auto lg = state->backend->loss_and_grad(params, batch, verbalizer, labels, opts);
            reply(res, json{{"loss", lg.loss}, {"grad", params_to_json(lg.grad)}});
        } else {
            reply(res, json{{"loss", state->backend->loss(params, batch, verbalizer, labels,
                                                          opts)}});
        }
    };
    server.Post("/loss_and_grad",
                guarded([run_loss](const httplib::Request& req, httplib::Response& res) {
                    run_loss(req, res, true);
                }));
    server.Post("/loss", guarded([run_loss](const httplib::Request& req, httplib::Response& res) {
        run_loss(req, res, false);
    }));
}

}  // namespace fewtype::backend
