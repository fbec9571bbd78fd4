// fewtype: few-shot entity typing over a masked-LM backend, with episodic
// meta-training, curated support sets and rule-based pattern overlays.

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fewtype/cli.hpp"
#include "fewtype/evaluation.hpp"

namespace {

void add_common_options(CLI::App* cmd, fewtype::cli::RunConfig& cfg, std::string& config_path,
                        std::vector<std::pair<std::string, std::string>>& overrides) {
    cmd->add_option("--config", config_path, "key = value config file; flags override it");
    auto add_set = [cmd, &overrides](const std::string& key, const std::string& help) {
        std::string names = "--" + key;
        std::string dashed = key;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        if (dashed != key) names += ",--" + dashed;
        if (key == "out_dir") names += ",--out";
        cmd->add_option_function<std::string>(
            names, [key, &overrides](const std::string& v) { overrides.emplace_back(key, v); },
            help);
    };
    // Every config key is also a long flag, in underscore and dashed form.
    for (const auto& [key, value] : fewtype::cli::config_entries(cfg))
        add_set(key, "config key " + key + " (default: " + (value.empty() ? "unset" : value) + ")");
}

fewtype::cli::RunConfig resolve_config(
    const std::string& config_path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
    fewtype::cli::RunConfig cfg;
    if (!config_path.empty()) cfg = fewtype::cli::load_config_file(config_path);
    for (const auto& [key, value] : overrides) fewtype::cli::apply_override(cfg, key, value);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"few-shot named entity typing toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    fewtype::cli::RunConfig defaults;

    auto* prepare = app.add_subcommand("prepare", "parse corpora and summarize label coverage");
    auto* sample = app.add_subcommand("sample", "draw a k-shot support set from target_train");
    auto* meta_train = app.add_subcommand("meta-train", "meta-train an initialization on episodes");
    auto* run = app.add_subcommand("run", "finetune on a support set, predict and score");
    auto* patterns = app.add_subcommand("patterns", "score the pattern rules in isolation");
    auto* report = app.add_subcommand("report", "render a report.json and emit chart CSVs");
    for (auto* cmd : {prepare, sample, meta_train, run, patterns, report})
        add_common_options(cmd, defaults, config_path, overrides);

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = resolve_config(config_path, overrides);
        if (prepare->parsed()) {
            auto summary = fewtype::cli::cmd_prepare(cfg);
            for (const auto& [name, cs] : summary.corpora)
                std::cout << name << ": " << cs.sentences << " sentences, " << cs.instances
                          << " instances, " << cs.label_counts.size() << " labels, " << cs.repairs
                          << " repairs\n";
            for (const auto& label : summary.uncovered_test_labels)
                std::cout << "warning: test label '" << label << "' missing from target_train\n";
        } else if (sample->parsed()) {
            std::cout << "wrote " << fewtype::cli::cmd_sample(cfg).string() << "\n";
        } else if (meta_train->parsed()) {
            std::cout << "wrote " << fewtype::cli::cmd_meta_train(cfg).string() << "\n";
        } else if (run->parsed()) {
            auto rep = fewtype::cli::cmd_run(cfg);
            std::cout << fewtype::evaluation::emit_report(rep, "text");
        } else if (patterns->parsed()) {
            auto summary = fewtype::cli::cmd_patterns(cfg);
            std::cout << "matched " << summary.matched << " of " << summary.total
                      << " mentions\n";
            for (const auto& [category, s] : summary.per_category)
                std::cout << category << ": P " << s.precision << " R " << s.recall << " F1 "
                          << s.f1 << " (support " << s.support << ")\n";
        } else if (report->parsed()) {
            fewtype::cli::cmd_report(cfg);
            std::cout << "wrote charts under " << cfg.out_dir << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fewtype::cli::exit_code_for(e);
    }
    return 0;
}
