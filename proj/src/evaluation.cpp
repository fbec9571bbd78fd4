#include "fewtype/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace fewtype::evaluation {

std::size_t EvalReport::total() const {
    std::size_t n = 0;
    for (const auto& [key, count] : confusion) n += count;
    return n;
}

namespace {

double f1_of(double precision, double recall) {
    if (precision + recall == 0.0) return 0.0;
    if (precision == recall) return precision;  // harmonic mean, exactly
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

EvalReport evaluate(std::span<const LabeledId> preds, std::span<const LabeledId> golds,
                    const LabelSet& labels, const EvalOptions& opts) {
    if (preds.size() != golds.size())
        throw AlignmentMismatchError("got " + std::to_string(preds.size()) + " predictions for " +
                                     std::to_string(golds.size()) + " golds");
    if (golds.empty()) throw EmptyEvaluationError();

    auto sorted_by_id = [](std::span<const LabeledId> in) {
        std::vector<const LabeledId*> out;
        out.reserve(in.size());
        for (const auto& item : in) out.push_back(&item);
        std::stable_sort(out.begin(), out.end(),
                         [](const LabeledId* a, const LabeledId* b) { return a->instance < b->instance; });
        return out;
    };
    auto p_sorted = sorted_by_id(preds);
    auto g_sorted = sorted_by_id(golds);

    EvalReport report;
    report.labels = labels;
    report.per_category.resize(labels.size());
    std::vector<std::size_t> tp(labels.size(), 0), fp(labels.size(), 0), fn(labels.size(), 0);

    for (std::size_t i = 0; i < p_sorted.size(); ++i) {
        if (!(p_sorted[i]->instance == g_sorted[i]->instance))
            throw AlignmentMismatchError("instance " + p_sorted[i]->instance.str() +
                                         " has no matching gold");
        std::size_t gold = labels.index_of(g_sorted[i]->label);
        std::size_t pred = labels.index_of(p_sorted[i]->label);
        ++report.confusion[{gold, pred}];
        if (gold == pred) {
            ++tp[gold];
        } else {
            ++fn[gold];
            ++fp[pred];
        }
    }

    std::size_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
    double macro_sum = 0.0;
    std::size_t macro_n = 0;
    for (std::size_t c = 0; c < labels.size(); ++c) {
        auto& cat = report.per_category[c];
        cat.support = tp[c] + fn[c];
        cat.precision = (tp[c] + fp[c]) ? static_cast<double>(tp[c]) / (tp[c] + fp[c]) : 0.0;
        cat.recall = cat.support ? static_cast<double>(tp[c]) / cat.support : 0.0;
        cat.f1 = f1_of(cat.precision, cat.recall);
        tp_sum += tp[c];
        fp_sum += fp[c];
        fn_sum += fn[c];
        if (opts.macro_includes_absent || cat.support > 0) {
            macro_sum += cat.f1;
            ++macro_n;
        }
    }
    double micro_p = (tp_sum + fp_sum) ? static_cast<double>(tp_sum) / (tp_sum + fp_sum) : 0.0;
    double micro_r = (tp_sum + fn_sum) ? static_cast<double>(tp_sum) / (tp_sum + fn_sum) : 0.0;
    report.micro_f1 = f1_of(micro_p, micro_r);
    report.macro_f1 = macro_n ? macro_sum / static_cast<double>(macro_n) : 0.0;
    return report;
}

std::vector<std::pair<std::string, double>> per_category_chart_data(const EvalReport& report) {
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t c = 0; c < report.labels.size(); ++c)
        out.emplace_back(report.labels.name(c), report.per_category[c].f1);
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

std::string emit_report(const EvalReport& report, std::string_view format) {
    if (format == "json") {
        nlohmann::ordered_json j;
        j["micro_f1"] = report.micro_f1;
        j["macro_f1"] = report.macro_f1;
        auto cats = nlohmann::ordered_json::object();
        for (std::size_t c = 0; c < report.labels.size(); ++c) {
            const auto& cat = report.per_category[c];
            cats[report.labels.name(c)] = {{"p", cat.precision},
                                           {"r", cat.recall},
                                           {"f1", cat.f1},
                                           {"support", cat.support}};
        }
        j["per_category"] = std::move(cats);
        auto confusion = nlohmann::ordered_json::array();
        for (const auto& [key, count] : report.confusion)
            confusion.push_back({report.labels.name(key.first), report.labels.name(key.second),
                                 count});
        j["confusion"] = std::move(confusion);
        return j.dump(2) + "\n";
    }
    if (format == "text") {
        std::ostringstream out;
        out << std::left << std::setw(28) << "category" << std::right << std::setw(8) << "P"
            << std::setw(8) << "R" << std::setw(8) << "F1" << std::setw(9) << "support" << '\n';
        out << std::string(61, '-') << '\n';
        out << std::fixed << std::setprecision(4);
        for (std::size_t c = 0; c < report.labels.size(); ++c) {
            const auto& cat = report.per_category[c];
            out << std::left << std::setw(28) << report.labels.name(c) << std::right << std::setw(8)
                << cat.precision << std::setw(8) << cat.recall << std::setw(8) << cat.f1
                << std::setw(9) << cat.support << '\n';
        }
        out << std::string(61, '-') << '\n';
        out << "micro-F1 " << report.micro_f1 << "  macro-F1 " << report.macro_f1 << "  ("
            << report.total() << " instances)\n";
        return out.str();
    }
    throw UnsupportedFormatError(std::string(format));
}

EvalReport report_from_json(std::string_view json_text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse report JSON: " + std::string(e.what()));
    }
    EvalReport report;
    report.micro_f1 = j.at("micro_f1").get<double>();
    report.macro_f1 = j.at("macro_f1").get<double>();
    std::vector<std::string> names;
    for (const auto& [name, value] : j.at("per_category").items()) {
        names.push_back(name);
        CategoryScore cat;
        cat.precision = value.at("p").get<double>();
        cat.recall = value.at("r").get<double>();
        cat.f1 = value.at("f1").get<double>();
        cat.support = value.at("support").get<std::size_t>();
        report.per_category.push_back(cat);
    }
    report.labels = LabelSet(std::move(names));
    for (const auto& entry : j.at("confusion")) {
        std::size_t gold = report.labels.index_of(entry.at(0).get<std::string>());
        std::size_t pred = report.labels.index_of(entry.at(1).get<std::string>());
        report.confusion[{gold, pred}] = entry.at(2).get<std::size_t>();
    }
    return report;
}

}  // namespace fewtype::evaluation
