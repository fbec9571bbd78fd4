#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fewtype/evaluation.hpp"

namespace fewtype::cli {

/// Flat experiment configuration. Every field can come from a "key = value"
/// config file or a command-line flag; flags win. The numeric defaults are
/// the toolkit's standard hyperparameters.
struct RunConfig {
    // inputs
    std::string general_corpus;  // meta-training corpus (CoNLL)
    std::string target_train;    // target-domain corpus the support set is drawn from
    std::string target_test;
    std::string support_file;  // optional hand-curated support set
    std::string verbalizer;    // optional; defaults to lowercased label names
    std::string rules;         // optional pattern rule file
    std::string vocab;         // optional word list for the tiny backend
    std::string report_file;   // for the report command; defaults to <out>/report.json

    // outputs
    std::string out_dir = "run";

    // backend
    std::string backend = "tiny";  // "tiny" or "http"
    std::string http_url;
    std::string model_name = "tiny-reference";
    std::size_t hidden_dim = 32;
    std::size_t max_seq_len = 128;

    // prompt
    std::string template_pattern = "{x} . {m} is a {MASK} .";

    // sampling; n_way shapes meta-training episodes only (0 = all labels).
    // The sample and run commands always span every target label.
    std::size_t k_shot = 5;
    std::size_t k_query = 15;
    std::size_t n_way = 0;
    std::size_t n_tasks = 40;
    bool dedup = false;

    // fine-tuning (meta-testing)
    std::size_t inner_batch = 8;
    std::size_t meta_test_epochs = 10;
    double finetune_lr = 1e-2;
    double target_smoothing = 0.0;
    bool literal_kl = false;
    bool freeze_head = false;

    // meta-learning
    double inner_lr = 1e-2;
    double meta_lr = 5e-3;
    std::size_t outer_batch = 32;
    std::size_t max_meta_steps = 15;
    std::size_t inner_epochs = 1;
    bool first_order = true;
    bool sum_aggregate = false;

    // run initialization: "random" or a checkpoint directory
    std::string init = "random";

    // pattern merging: "", "model_wins", "pattern_wins", "pattern_only_for=A,B"
    std::string merge;

    std::uint64_t seed = 0;
};

/// Set one field by key. Throws ConfigError for unknown keys or unparsable
/// values. The key names double as config-file keys and long-flag names.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

/// All (key, current value) pairs in key order; the canonical snapshot.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

RunConfig load_config_file(const std::filesystem::path& path);

/// Bounds checks shared by every command. Throws ConfigError.
void validate(const RunConfig& cfg);

struct CorpusSummary {
    std::size_t sentences = 0;
    std::size_t instances = 0;
    std::map<std::string, std::size_t> label_counts;
    std::size_t repairs = 0;
};

struct PrepareSummary {
    std::map<std::string, CorpusSummary> corpora;  // keyed by config field name
    std::vector<std::string> uncovered_test_labels;
};

/// prepare: parse the configured corpora and write per-label instance counts
/// plus coverage checks to <out>/prepare_summary.json.
PrepareSummary cmd_prepare(const RunConfig& cfg);

/// sample: draw a k-shot support set from target_train and write it as
/// <out>/support.conll (one sentence per instance, only that mention tagged).
std::filesystem::path cmd_sample(const RunConfig& cfg);

/// meta-train: episodes from the general corpus, the meta-update loop, a
/// checkpoint per step under <out>/checkpoints and the final parameters
/// under <out>/checkpoint. Returns the final checkpoint path.
std::filesystem::path cmd_meta_train(const RunConfig& cfg);

/// run: finetune from cfg.init on the support set, predict the test split,
/// optionally overlay pattern rules, score, and write report.json,
/// report.txt, predictions.jsonl and finetune_trace.jsonl.
evaluation::EvalReport cmd_run(const RunConfig& cfg);

struct PatternsSummary {
    std::size_t total = 0;
    std::size_t matched = 0;
    std::map<std::string, evaluation::CategoryScore> per_category;
};

/// patterns: run the rule file alone over the test corpus and score the
/// rule-covered categories in isolation.
PatternsSummary cmd_patterns(const RunConfig& cfg);

/// report: render an existing report.json as text and emit (label, f1) CSV
/// chart series split into a high and a low half.
void cmd_report(const RunConfig& cfg);

/// Process exit code for an error escaping a command: 2 config, 3 data,
/// 4 numerical divergence, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace fewtype::cli
