#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fewtype/corpus.hpp"

namespace fewtype::evaluation {

using corpus::InstanceId;
using corpus::LabelSet;

struct LabeledId {
    InstanceId instance;
    std::string label;
};

struct CategoryScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;  // gold count
};

/// Micro/macro F1 with a per-category breakdown and confusion counts.
/// per_category is ordered like `labels`; confusion keys are (gold, pred)
/// label indices into `labels`.
struct EvalReport {
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
    LabelSet labels;
    std::vector<CategoryScore> per_category;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> confusion;

    std::size_t total() const;
};

struct EvalOptions {
    /// Average macro-F1 over every label instead of only those with gold
    /// support.
    bool macro_includes_absent = false;
};

/// Score aligned predictions against golds. The two sequences must carry the
/// same instance identities (order-insensitive); every label must belong to
/// `labels`.
EvalReport evaluate(std::span<const LabeledId> preds, std::span<const LabeledId> golds,
                    const LabelSet& labels, const EvalOptions& opts = {});

/// (label, f1) series sorted by descending f1, stable in label order — the
/// per-category bar-chart input.
std::vector<std::pair<std::string, double>> per_category_chart_data(const EvalReport& report);

/// Render a report. Formats: "json" (machine readable, round-trips through
/// report_from_json) and "text" (one row per category plus a footer).
std::string emit_report(const EvalReport& report, std::string_view format);

EvalReport report_from_json(std::string_view json_text);

}  // namespace fewtype::evaluation
