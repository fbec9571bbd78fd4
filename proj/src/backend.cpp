#include "fewtype/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace fewtype::backend {

Array Array::zeros(std::vector<std::size_t> shape) {
    Array a;
    a.shape = std::move(shape);
    std::size_t n = 1;
    for (std::size_t s : a.shape) n *= s;
    a.data.assign(n, 0.0);
    return a;
}

std::size_t Array::numel() const {
    std::size_t n = 1;
    for (std::size_t s : shape) n *= s;
    return n;
}

namespace {

void require_aligned(const ParamSet& a, const ParamSet& b, const char* what) {
    if (a.size() != b.size())
        throw DimensionMismatchError(std::string(what) + ": parameter name sets differ");
    auto ia = a.begin();
    auto ib = b.begin();
    for (; ia != a.end(); ++ia, ++ib) {
        if (ia->first != ib->first)
            throw DimensionMismatchError(std::string(what) + ": parameter name sets differ");
        if (!ia->second.same_shape(ib->second))
            throw DimensionMismatchError(std::string(what) + ": shape of '" + ia->first +
                                         "' differs");
    }
}

}  // namespace

ParamSet apply_update(const ParamSet& params, const ParamSet& grad, double lr) {
    require_aligned(params, grad, "apply_update");
    ParamSet out = params;
    auto ig = grad.begin();
    for (auto io = out.begin(); io != out.end(); ++io, ++ig)
        for (std::size_t i = 0; i < io->second.data.size(); ++i)
            io->second.data[i] -= lr * ig->second.data[i];
    return out;
}

void axpy(ParamSet& acc, double a, const ParamSet& x) {
    require_aligned(acc, x, "axpy");
    auto ix = x.begin();
    for (auto ia = acc.begin(); ia != acc.end(); ++ia, ++ix)
        for (std::size_t i = 0; i < ia->second.data.size(); ++i)
            ia->second.data[i] += a * ix->second.data[i];
}

void scale(ParamSet& p, double a) {
    for (auto& [name, arr] : p)
        for (double& v : arr.data) v *= a;
}

ParamSet zeros_like(const ParamSet& p) {
    ParamSet out;
    for (const auto& [name, arr] : p) out[name] = Array::zeros(arr.shape);
    return out;
}

double inf_norm(const ParamSet& p) {
    double m = 0.0;
    for (const auto& [name, arr] : p)
        for (double v : arr.data) m = std::max(m, std::abs(v));
    return m;
}

bool all_finite(const ParamSet& p) {
    for (const auto& [name, arr] : p)
        for (double v : arr.data)
            if (!std::isfinite(v)) return false;
    return true;
}

double Backend::loss(const ParamSet& params, std::span<const PromptTarget> batch,
                     const prompting::BoundVerbalizer& verbalizer, const corpus::LabelSet& labels,
                     const LossOpts& opts) const {
    return loss_and_grad(params, batch, verbalizer, labels, opts).loss;
}

ParamSet Backend::hessian_vector(const ParamSet& params, std::span<const PromptTarget> batch,
                                 const prompting::BoundVerbalizer& verbalizer,
                                 const corpus::LabelSet& labels, const ParamSet& vec,
                                 const LossOpts& opts) const {
    double vnorm = inf_norm(vec);
    if (vnorm == 0.0) return zeros_like(params);
    // The analytic gradient is noise-free, so a small central step keeps the
    // truncation error of the differenced Hessian product negligible.
    double r = 1e-6 * (1.0 + inf_norm(params)) / vnorm;

    ParamSet plus = params;
    axpy(plus, r, vec);
    ParamSet minus = params;
    axpy(minus, -r, vec);

    ParamSet hv = loss_and_grad(plus, batch, verbalizer, labels, opts).grad;
    axpy(hv, -1.0, loss_and_grad(minus, batch, verbalizer, labels, opts).grad);
    scale(hv, 1.0 / (2.0 * r));
    return hv;
}

namespace {

void write_f32_le(std::ofstream& out, std::span<const double> values) {
    for (double v : values) {
        float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, sizeof(bits));
        unsigned char bytes[4] = {
            static_cast<unsigned char>(bits & 0xff),
            static_cast<unsigned char>((bits >> 8) & 0xff),
            static_cast<unsigned char>((bits >> 16) & 0xff),
            static_cast<unsigned char>((bits >> 24) & 0xff),
        };
        out.write(reinterpret_cast<const char*>(bytes), 4);
    }
}

std::vector<double> read_f32_le(const std::filesystem::path& file, std::size_t count) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw PathNotFoundError(file.string());
    std::vector<unsigned char> raw(count * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw BackendProtocolError("checkpoint file " + file.string() + " is truncated");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) |
                             (static_cast<std::uint32_t>(raw[4 * i + 1]) << 8) |
                             (static_cast<std::uint32_t>(raw[4 * i + 2]) << 16) |
                             (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
        float f;
        std::memcpy(&f, &bits, sizeof(f));
        out[i] = static_cast<double>(f);
    }
    return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const ParamSet& params,
                     const BackendSpec& spec) {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json manifest;
    manifest["format"] = "fewtype-checkpoint";
    manifest["version"] = 1;
    manifest["spec"] = {{"vocab_size", spec.vocab_size},
                        {"hidden_dim", spec.hidden_dim},
                        {"max_seq_len", spec.max_seq_len},
                        {"mask_token_id", spec.mask_token_id}};
    auto params_json = nlohmann::ordered_json::array();
    for (const auto& [name, arr] : params) {
        std::string file = name + ".f32";
        params_json.push_back({{"name", name}, {"shape", arr.shape}, {"file", file}});
        std::ofstream out(dir / file, std::ios::binary | std::ios::trunc);
        if (!out) throw PathNotFoundError((dir / file).string());
        write_f32_le(out, arr.data);
    }
    manifest["params"] = std::move(params_json);
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw PathNotFoundError((dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw PathNotFoundError((dir / "manifest.json").string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw BackendProtocolError("cannot parse checkpoint manifest: " + std::string(e.what()));
    }
    if (manifest.value("format", "") != "fewtype-checkpoint")
        throw BackendProtocolError("not a checkpoint manifest: " + (dir / "manifest.json").string());

    Checkpoint cp;
    const auto& spec = manifest.at("spec");
    cp.spec.vocab_size = spec.at("vocab_size").get<std::size_t>();
    cp.spec.hidden_dim = spec.at("hidden_dim").get<std::size_t>();
    cp.spec.max_seq_len = spec.at("max_seq_len").get<std::size_t>();
    cp.spec.mask_token_id = spec.at("mask_token_id").get<int>();

    for (const auto& entry : manifest.at("params")) {
        Array arr;
        arr.shape = entry.at("shape").get<std::vector<std::size_t>>();
        arr.data = read_f32_le(dir / entry.at("file").get<std::string>(), arr.numel());
        cp.params[entry.at("name").get<std::string>()] = std::move(arr);
    }
    return cp;
}

}  // namespace fewtype::backend
