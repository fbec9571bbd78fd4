#include "fewtype/cli.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fewtype/backend.hpp"
#include "fewtype/http_backend.hpp"
#include "fewtype/metalearn.hpp"
#include "fewtype/patterns.hpp"
#include "fewtype/tiny_backend.hpp"
#include "fewtype/training.hpp"

namespace fewtype::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PathNotFoundError(path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw PathNotFoundError(path.string());
    out << content;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("expected a boolean, got '" + v + "'");
}

std::size_t parse_size(const std::string& v) {
    try {
        std::size_t used = 0;
        auto n = std::stoull(v, &used);
        if (used != v.size()) throw ConfigError("");
        return n;
    } catch (const std::exception&) {
        throw ConfigError("expected a non-negative integer, got '" + v + "'");
    }
}

double parse_double(const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw ConfigError("");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("expected a number, got '" + v + "'");
    }
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

std::string double_str(double d) {
    std::ostringstream out;
    out.precision(17);
    out << d;
    return out.str();
}

struct FieldBinding {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::map<std::string, FieldBinding>& bindings() {
    static const std::map<std::string, FieldBinding> map = [] {
        std::map<std::string, FieldBinding> m;
        auto str = [&m](const char* key, std::string RunConfig::*field) {
            m[key] = {[field](RunConfig& c, const std::string& v) { c.*field = v; },
                      [field](const RunConfig& c) { return c.*field; }};
        };
        auto num = [&m](const char* key, std::size_t RunConfig::*field) {
            m[key] = {[field](RunConfig& c, const std::string& v) { c.*field = parse_size(v); },
                      [field](const RunConfig& c) { return std::to_string(c.*field); }};
        };
        auto dbl = [&m](const char* key, double RunConfig::*field) {
            m[key] = {[field](RunConfig& c, const std::string& v) { c.*field = parse_double(v); },
                      [field](const RunConfig& c) { return double_str(c.*field); }};
        };
        auto flag = [&m](const char* key, bool RunConfig::*field) {
            m[key] = {[field](RunConfig& c, const std::string& v) { c.*field = parse_bool(v); },
                      [field](const RunConfig& c) { return bool_str(c.*field); }};
        };

        str("general_corpus", &RunConfig::general_corpus);
        str("target_train", &RunConfig::target_train);
        str("target_test", &RunConfig::target_test);
        str("support_file", &RunConfig::support_file);
        str("verbalizer", &RunConfig::verbalizer);
        str("rules", &RunConfig::rules);
        str("vocab", &RunConfig::vocab);
        str("report_file", &RunConfig::report_file);
        str("out_dir", &RunConfig::out_dir);
        str("backend", &RunConfig::backend);
        str("http_url", &RunConfig::http_url);
        str("model_name", &RunConfig::model_name);
        num("hidden_dim", &RunConfig::hidden_dim);
        num("max_seq_len", &RunConfig::max_seq_len);
        str("template", &RunConfig::template_pattern);
        num("k_shot", &RunConfig::k_shot);
        num("k_query", &RunConfig::k_query);
        num("n_way", &RunConfig::n_way);
        num("n_tasks", &RunConfig::n_tasks);
        flag("dedup", &RunConfig::dedup);
        num("inner_batch", &RunConfig::inner_batch);
        num("meta_test_epochs", &RunConfig::meta_test_epochs);
        dbl("finetune_lr", &RunConfig::finetune_lr);
        dbl("target_smoothing", &RunConfig::target_smoothing);
        flag("literal_kl", &RunConfig::literal_kl);
        flag("freeze_head", &RunConfig::freeze_head);
        dbl("inner_lr", &RunConfig::inner_lr);
        dbl("meta_lr", &RunConfig::meta_lr);
        num("outer_batch", &RunConfig::outer_batch);
        num("max_meta_steps", &RunConfig::max_meta_steps);
        num("inner_epochs", &RunConfig::inner_epochs);
        flag("first_order", &RunConfig::first_order);
        flag("sum_aggregate", &RunConfig::sum_aggregate);
        str("init", &RunConfig::init);
        str("merge", &RunConfig::merge);
        m["seed"] = {[](RunConfig& c, const std::string& v) {
                         try {
                             c.seed = std::stoull(v);
                         } catch (const std::exception&) {
                             throw ConfigError("expected a seed integer, got '" + v + "'");
                         }
                     },
                     [](const RunConfig& c) { return std::to_string(c.seed); }};
        return m;
    }();
    return map;
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto it = bindings().find(key);
    if (it == bindings().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(cfg, value);
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, binding] : bindings()) out.emplace_back(key, binding.get(cfg));
    return out;
}

RunConfig load_config_file(const fs::path& path) {
    RunConfig cfg;
    std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        std::size_t eq = line.find('=', start);
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        auto trim = [](std::string s) {
            std::size_t b = s.find_first_not_of(" \t");
            std::size_t e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        apply_override(cfg, trim(line.substr(start, eq - start)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

void validate(const RunConfig& cfg) {
    if (cfg.backend != "tiny" && cfg.backend != "http")
        throw ConfigError("backend must be 'tiny' or 'http'");
    if (cfg.backend == "http" && cfg.http_url.empty())
        throw ConfigError("backend 'http' needs http_url");
    if (cfg.max_seq_len < 8) throw ConfigError("max_seq_len must be at least 8");
    if (cfg.hidden_dim == 0) throw ConfigError("hidden_dim must be positive");
    if (cfg.k_shot == 0) throw ConfigError("k_shot must be >= 1");
    if (cfg.n_way == 1) throw ConfigError("n_way must be >= 2 (or 0 for all labels)");
    if (cfg.inner_batch == 0 || cfg.outer_batch == 0)
        throw ConfigError("batch sizes must be >= 1");
    if (cfg.meta_test_epochs == 0 || cfg.inner_epochs == 0)
        throw ConfigError("epoch counts must be >= 1");
    if (!(cfg.finetune_lr > 0.0) || !(cfg.inner_lr > 0.0) || !(cfg.meta_lr > 0.0))
        throw ConfigError("learning rates must be positive");
    if (cfg.target_smoothing < 0.0 || cfg.target_smoothing >= 0.5)
        throw ConfigError("target_smoothing must lie in [0, 0.5)");
    if (cfg.literal_kl && cfg.target_smoothing == 0.0)
        throw ConfigError("literal_kl needs soft targets; set target_smoothing > 0");
}

namespace {

fs::path prepare_run_dir(const RunConfig& cfg) {
    fs::path out(cfg.out_dir);
    fs::create_directories(out);
    std::string snapshot;
    for (const auto& [key, value] : config_entries(cfg)) snapshot += key + " = " + value + "\n";
    write_file(out / "config.txt", snapshot);
    return out;
}

struct LoadedCorpus {
    std::vector<corpus::LabeledSentence> sentences;
    std::vector<corpus::TypingInstance> instances;
    std::vector<corpus::Diagnostic> diagnostics;
};

LoadedCorpus load_corpus(const std::string& path) {
    auto parsed = corpus::parse_conll(read_file(path));
    LoadedCorpus out;
    out.diagnostics = parsed.diagnostics;
    out.sentences = std::move(parsed.sentences);
    if (out.sentences.empty()) throw EmptyCorpusError(path + " contains no sentences");
    out.instances = corpus::extract_all_mentions(out.sentences);
    return out;
}

// Vocabulary for the tiny backend: an explicit word list when configured,
// otherwise every word observed in the configured inputs, first come first
// served, so meta-train and run agree on ids given the same config.
std::vector<std::string> collect_vocab(const RunConfig& cfg,
                                       const prompting::Verbalizer& verbalizer) {
    std::vector<std::string> words;
    std::set<std::string> seen;
    auto add = [&](const std::string& w) {
        if (!w.empty() && seen.insert(w).second) words.push_back(w);
    };
    if (!cfg.vocab.empty()) {
        std::istringstream in(read_file(cfg.vocab));
        std::string w;
        while (in >> w) add(w);
        return words;
    }
    for (const std::string& path :
         {cfg.general_corpus, cfg.target_train, cfg.target_test, cfg.support_file}) {
        if (path.empty()) continue;
        for (const auto& sentence : load_corpus(path).sentences)
            for (const auto& token : sentence.tokens) add(token);
    }
    for (const auto& [label, entries] : verbalizer.entries)
        for (const auto& e : entries) add(e.word);
    std::istringstream tpl(cfg.template_pattern);
    std::string w;
    while (tpl >> w)
        if (w.find('{') == std::string::npos) add(w);
    return words;
}

std::unique_ptr<backend::Backend> make_backend(const RunConfig& cfg,
                                               const prompting::Verbalizer& verbalizer) {
    if (cfg.backend == "http") return std::make_unique<backend::HttpBackend>(cfg.http_url, cfg.model_name);
    backend::TinyBackendConfig tiny;
    tiny.hidden_dim = cfg.hidden_dim;
    tiny.max_seq_len = cfg.max_seq_len;
    return std::make_unique<backend::TinyBackend>(collect_vocab(cfg, verbalizer), tiny);
}

prompting::Verbalizer load_verbalizer(const RunConfig& cfg, const corpus::LabelSet& labels) {
    if (!cfg.verbalizer.empty()) return prompting::parse_verbalizer(read_file(cfg.verbalizer));
    return prompting::identity_verbalizer(labels);
}

backend::ParamSet initial_params(const RunConfig& cfg, const backend::Backend& be) {
    if (cfg.init == "random") return be.init_params(cfg.seed);
    auto cp = backend::load_checkpoint(cfg.init);
    if (cp.spec.vocab_size != be.spec().vocab_size || cp.spec.hidden_dim != be.spec().hidden_dim)
        throw DimensionMismatchError(
            "checkpoint was trained for a different backend shape (vocab " +
            std::to_string(cp.spec.vocab_size) + ", hidden " + std::to_string(cp.spec.hidden_dim) +
            ")");
    return cp.params;
}

training::TrainConfig finetune_config(const RunConfig& cfg) {
    training::TrainConfig tc;
    tc.inner_batch_size = cfg.inner_batch;
    tc.epochs = cfg.meta_test_epochs;
    tc.lr = cfg.finetune_lr;
    tc.seed = cfg.seed;
    tc.target_smoothing = cfg.target_smoothing;
    tc.loss_opts.literal_kl = cfg.literal_kl;
    tc.loss_opts.freeze_head = cfg.freeze_head;
    return tc;
}

corpus::LabeledSentence instance_to_sentence(const corpus::TypingInstance& inst) {
    corpus::LabeledSentence s;
    s.tokens = inst.tokens;
    s.tags.assign(inst.tokens.size(), "O");
    for (std::size_t i = inst.span_start; i <= inst.span_end; ++i)
        s.tags[i] = (i == inst.span_start ? "B-" : "I-") + inst.label;
    return s;
}

json diagnostics_json(const std::vector<corpus::Diagnostic>& diags) {
    json out = json::array();
    for (const auto& d : diags)
        out.push_back({{"line", d.line_no}, {"message", d.message}});
    return out;
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->kind()) {
            case ErrorKind::config: return 2;
            case ErrorKind::data: return 3;
            case ErrorKind::numeric: return 4;
            case ErrorKind::other: return 1;
        }
    }
    return 1;
}

PrepareSummary cmd_prepare(const RunConfig& cfg) {
    validate(cfg);
    fs::path out = prepare_run_dir(cfg);
    PrepareSummary summary;

    auto summarize = [&](const char* key, const std::string& path) {
        if (path.empty()) return;
        auto loaded = load_corpus(path);
        CorpusSummary cs;
        cs.sentences = loaded.sentences.size();
        cs.instances = loaded.instances.size();
        cs.repairs = loaded.diagnostics.size();
        for (const auto& inst : loaded.instances) ++cs.label_counts[inst.label];
        summary.corpora[key] = std::move(cs);
    };
    summarize("general_corpus", cfg.general_corpus);
    summarize("target_train", cfg.target_train);
    summarize("target_test", cfg.target_test);
    summarize("support_file", cfg.support_file);
    if (summary.corpora.empty()) throw ConfigError("prepare needs at least one corpus path");

    if (summary.corpora.count("target_train") && summary.corpora.count("target_test")) {
        const auto& train = summary.corpora["target_train"].label_counts;
        for (const auto& [label, n] : summary.corpora["target_test"].label_counts)
            if (!train.count(label)) summary.uncovered_test_labels.push_back(label);
    }

    ordered_json j;
    for (const auto& [key, cs] : summary.corpora)
        j["corpora"][key] = {{"sentences", cs.sentences},
                             {"instances", cs.instances},
                             {"labels", cs.label_counts},
                             {"repairs", cs.repairs}};
    j["uncovered_test_labels"] = summary.uncovered_test_labels;
    write_file(out / "prepare_summary.json", j.dump(2) + "\n");
    return summary;
}

std::filesystem::path cmd_sample(const RunConfig& cfg) {
    validate(cfg);
    if (cfg.target_train.empty()) throw ConfigError("sample needs target_train");
    fs::path out = prepare_run_dir(cfg);

    auto loaded = load_corpus(cfg.target_train);
    // Like run, sample serves the target task: every target label, k each.
    episodes::SamplerConfig sc{cfg.k_shot, 0, cfg.dedup, cfg.seed};
    auto support = episodes::sample_support(loaded.instances, sc);

    std::vector<corpus::LabeledSentence> sentences;
    sentences.reserve(support.size());
    for (const auto& inst : support) sentences.push_back(instance_to_sentence(inst));
    fs::path support_path = out / "support.conll";
    write_file(support_path, corpus::to_conll(sentences));

    ordered_json j;
    j["k_shot"] = cfg.k_shot;
    j["dedup"] = cfg.dedup;
    std::map<std::string, std::vector<std::string>> surfaces;
    for (const auto& inst : support) surfaces[inst.label].push_back(inst.surface());
    for (const auto& [label, s] : surfaces) j["support"][label] = s;
    write_file(out / "sample_summary.json", j.dump(2) + "\n");
    return support_path;
}

std::filesystem::path cmd_meta_train(const RunConfig& cfg) {
    validate(cfg);
    if (cfg.general_corpus.empty()) throw ConfigError("meta-train needs general_corpus");
    fs::path out = prepare_run_dir(cfg);

    auto loaded = load_corpus(cfg.general_corpus);
    auto all_labels = corpus::build_label_set(loaded.instances);
    auto verbalizer = load_verbalizer(cfg, all_labels);
    auto be = make_backend(cfg, verbalizer);

    episodes::SamplerConfig sc{cfg.k_shot, cfg.n_way, false, cfg.seed};
    auto tasks = episodes::make_task_stream(loaded.instances, sc, cfg.k_query, cfg.n_tasks);

    metalearn::MetaConfig mc;
    mc.inner_lr = cfg.inner_lr;
    mc.meta_lr = cfg.meta_lr;
    mc.outer_batch_size = cfg.outer_batch;
    mc.max_meta_steps = cfg.max_meta_steps;
    mc.n_tasks = cfg.n_tasks;
    mc.inner_epochs = cfg.inner_epochs;
    mc.first_order = cfg.first_order;
    mc.sum_aggregate = cfg.sum_aggregate;
    mc.seed = cfg.seed;

    std::ofstream trace(out / "meta_trace.jsonl", std::ios::trunc);
    auto theta0 = be->init_params(cfg.seed);
    backend::LossOpts opts{cfg.literal_kl, cfg.freeze_head};
    auto sink = [&](const metalearn::MetaStepTrace& t, const backend::ParamSet& theta) {
        trace << json{{"meta_step", t.meta_step},
                      {"mean_query_loss", t.mean_query_loss},
                      {"tasks", t.n_tasks}}
                     .dump()
              << '\n';
        char name[32];
        std::snprintf(name, sizeof(name), "step_%03zu", t.meta_step);
        backend::save_checkpoint(out / "checkpoints" / name, theta, be->spec());
    };
    auto theta_star = metalearn::meta_train_episodes(*be, theta0, tasks,
                                                     training::Template(cfg.template_pattern),
                                                     verbalizer, mc, cfg.target_smoothing, sink,
                                                     opts);

    fs::path final_dir = out / "checkpoint";
    backend::save_checkpoint(final_dir, theta_star, be->spec());
    return final_dir;
}

evaluation::EvalReport cmd_run(const RunConfig& cfg) {
    validate(cfg);
    if (cfg.target_test.empty()) throw ConfigError("run needs target_test");
    if (cfg.target_train.empty() && cfg.support_file.empty())
        throw ConfigError("run needs target_train or support_file");
    fs::path out = prepare_run_dir(cfg);

    // Target label inventory comes from the training split when present so
    // the distribution covers labels the small support set may miss.
    std::vector<corpus::TypingInstance> support;
    corpus::LabelSet labels;
    std::vector<corpus::Diagnostic> support_diags;
    if (!cfg.support_file.empty()) {
        corpus::LabelSet expected;
        bool have_expected = false;
        if (!cfg.target_train.empty()) {
            expected = corpus::build_label_set(load_corpus(cfg.target_train).instances);
            have_expected = true;
        }
        auto manual = episodes::load_manual_support(read_file(cfg.support_file), cfg.k_shot,
                                                    have_expected ? &expected : nullptr);
        support = std::move(manual.instances);
        labels = have_expected ? expected : manual.labels;
        support_diags = std::move(manual.diagnostics);
    } else {
        // The target task always spans the full target inventory; n_way only
        // shapes meta-training episodes.
        auto train = load_corpus(cfg.target_train);
        labels = corpus::build_label_set(train.instances);
        episodes::SamplerConfig sc{cfg.k_shot, 0, cfg.dedup, cfg.seed};
        support = episodes::sample_support(train.instances, sc);
    }

    auto test = load_corpus(cfg.target_test);
    auto verbalizer = load_verbalizer(cfg, labels);
    auto be = make_backend(cfg, verbalizer);
    prompting::BoundVerbalizer bound(verbalizer, be->tokenizer(), labels);
    training::Template tpl(cfg.template_pattern);

    auto params = initial_params(cfg, *be);
    auto tuned = training::finetune(*be, params, support, tpl, bound, labels, finetune_config(cfg));

    std::ofstream trace(out / "finetune_trace.jsonl", std::ios::trunc);
    for (std::size_t epoch = 0; epoch < tuned.epoch_losses.size(); ++epoch)
        trace << json{{"epoch", epoch + 1}, {"loss", tuned.epoch_losses[epoch]}}.dump() << '\n';

    auto predictions =
        training::predict_all(*be, tuned.params, test.instances, tpl, bound, labels);

    std::vector<evaluation::LabeledId> model_preds, golds;
    for (const auto& p : predictions) {
        model_preds.push_back({p.instance, p.label});
        golds.push_back({p.instance, p.gold});
    }

    std::vector<evaluation::LabeledId> final_preds = model_preds;
    if (!cfg.rules.empty() && !cfg.merge.empty() && cfg.merge != "model_wins") {
        auto rules = patterns::compile_rules(read_file(cfg.rules));
        auto verdicts = patterns::classify_all(test.instances, rules);
        final_preds = patterns::merge_predictions(model_preds, verdicts,
                                                  patterns::MergePolicy::parse(cfg.merge), labels);
    }

    std::ofstream pred_out(out / "predictions.jsonl", std::ios::trunc);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto& p = predictions[i];
        pred_out << json{{"instance", p.instance.str()},
                         {"gold", p.gold},
                         {"pred", final_preds[i].label},
                         {"dist", p.distribution}}
                        .dump()
                 << '\n';
    }
    if (!support_diags.empty())
        write_file(out / "support_diagnostics.json", diagnostics_json(support_diags).dump(2) + "\n");

    auto report = evaluation::evaluate(final_preds, golds, labels);
    write_file(out / "report.json", evaluation::emit_report(report, "json"));
    write_file(out / "report.txt", evaluation::emit_report(report, "text"));
    return report;
}

PatternsSummary cmd_patterns(const RunConfig& cfg) {
    validate(cfg);
    if (cfg.rules.empty()) throw ConfigError("patterns needs a rules file");
    if (cfg.target_test.empty()) throw ConfigError("patterns needs target_test");
    fs::path out = prepare_run_dir(cfg);

    auto rules = patterns::compile_rules(read_file(cfg.rules));
    auto test = load_corpus(cfg.target_test);
    auto verdicts = patterns::classify_all(test.instances, rules);

    PatternsSummary summary;
    summary.total = test.instances.size();
    std::set<std::string> rule_categories;
    for (const auto& r : rules) rule_categories.insert(r.category);

    std::map<std::string, std::size_t> tp, fp, gold_count;
    for (std::size_t i = 0; i < test.instances.size(); ++i) {
        const auto& gold = test.instances[i].label;
        if (rule_categories.count(gold)) ++gold_count[gold];
        if (!verdicts[i].label) continue;
        ++summary.matched;
        if (*verdicts[i].label == gold)
            ++tp[*verdicts[i].label];
        else
            ++fp[*verdicts[i].label];
    }
    for (const auto& category : rule_categories) {
        evaluation::CategoryScore score;
        std::size_t predicted = tp[category] + fp[category];
        score.support = gold_count[category];
        score.precision = predicted ? static_cast<double>(tp[category]) / predicted : 0.0;
        score.recall = score.support ? static_cast<double>(tp[category]) / score.support : 0.0;
        score.f1 = (score.precision + score.recall > 0.0)
                       ? 2.0 * score.precision * score.recall / (score.precision + score.recall)
                       : 0.0;
        summary.per_category[category] = score;
    }

    ordered_json j;
    j["instances"] = summary.total;
    j["matched"] = summary.matched;
    for (const auto& [category, s] : summary.per_category)
        j["per_category"][category] = {
            {"p", s.precision}, {"r", s.recall}, {"f1", s.f1}, {"support", s.support}};
    write_file(out / "patterns_report.json", j.dump(2) + "\n");
    return summary;
}

void cmd_report(const RunConfig& cfg) {
    fs::path report_path =
        cfg.report_file.empty() ? fs::path(cfg.out_dir) / "report.json" : fs::path(cfg.report_file);
    auto report = evaluation::report_from_json(read_file(report_path));

    fs::path out(cfg.out_dir);
    fs::create_directories(out);
    write_file(out / "report.txt", evaluation::emit_report(report, "text"));

    auto series = evaluation::per_category_chart_data(report);
    auto to_csv = [](auto begin, auto end) {
        std::string csv = "label,f1\n";
        for (auto it = begin; it != end; ++it) csv += it->first + "," + double_str(it->second) + "\n";
        return csv;
    };
    std::size_t half = (series.size() + 1) / 2;
    write_file(out / "chart.csv", to_csv(series.begin(), series.end()));
    write_file(out / "chart_high.csv", to_csv(series.begin(), series.begin() + half));
    write_file(out / "chart_low.csv", to_csv(series.begin() + half, series.end()));
}

}  // namespace fewtype::cli
