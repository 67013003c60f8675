#include "mlceval/report.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>

namespace mlceval {

namespace {

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string mean_std(const AggregateStat& s) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", s.mean, s.stddev);
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    if (s.size() >= width) return s;
    return s + std::string(width - s.size(), ' ');
}

const AggregateStat& stat(const AggregateReport& agg, const std::string& key) {
    static const AggregateStat zero{};
    auto it = agg.metrics.find(key);
    return it == agg.metrics.end() ? zero : it->second;
}

}  // namespace

std::string render_overall_table(const EvalReport& report) {
    std::ostringstream out;
    out << "overall (n=" << report.n << ", m=" << report.m << ")\n";
    out << "  exact   accuracy " << fixed3(report.exact_accuracy) << "  micro-f1 "
        << fixed3(report.exact_micro.f1) << "  macro-f1(observed) "
        << fixed3(report.macro_observed.exact.f1) << "\n";
    out << "  partial accuracy " << fixed3(report.partial_accuracy) << "  micro-f1 "
        << fixed3(report.partial_micro.f1) << "  macro-f1(observed) "
        << fixed3(report.macro_observed.partial.f1) << "\n";
    out << "  labels  micro-f1 " << fixed3(report.label_micro.f1) << "  macro-f1 "
        << fixed3(report.label_macro.f1) << "\n";
    out << "  instances dice-mean " << fixed3(report.instance_dice_mean) << "  f1-pooled "
        << fixed3(report.instance_f1_pooled) << "\n";
    if (report.parse_failures > 0)
        out << "  excluded parse failures: " << report.parse_failures << "\n";
    if (!report.self_check_ok) out << "  WARNING: internal identity self-check failed\n";
    return out.str();
}

std::string render_label_table(const EvalReport& report) {
    std::ostringstream out;
    out << pad("label", 10) << pad("precision", 11) << pad("recall", 9) << pad("f1", 7)
        << pad("accuracy", 10) << "support\n";
    for (const auto& e : report.per_label) {
        out << pad(e.name, 10) << pad(fixed3(e.prf.precision), 11)
            << pad(fixed3(e.prf.recall), 9) << pad(fixed3(e.prf.f1), 7)
            << pad(fixed3(e.accuracy), 10) << e.prf.support << "\n";
    }
    return out.str();
}

std::string render_set_table(const EvalReport& report) {
    std::ostringstream out;
    out << pad("label set", 12) << pad("textual", 16) << pad("support", 9)
        << pad("exact-f1", 10) << pad("partial-f1", 12) << "flags\n";
    for (const auto& e : report.per_set) {
        out << pad(e.binary, 12) << pad(e.textual, 16)
            << pad(std::to_string(e.support), 9) << pad(fixed3(e.exact.f1), 10)
            << pad(fixed3(e.partial.f1), 12) << (e.no_support ? "no-support" : "") << "\n";
    }
    return out.str();
}

std::string render_overall_table(const AggregateReport& agg) {
    std::ostringstream out;
    out << "overall, mean ± std over " << agg.runs << " runs\n";
    out << "  exact   accuracy " << mean_std(stat(agg, "exact.accuracy")) << "  micro-f1 "
        << mean_std(stat(agg, "exact.micro.f1")) << "  macro-f1(observed) "
        << mean_std(stat(agg, "macro.observed.exact.f1")) << "\n";
    out << "  partial accuracy " << mean_std(stat(agg, "partial.accuracy")) << "  micro-f1 "
        << mean_std(stat(agg, "partial.micro.f1")) << "  macro-f1(observed) "
        << mean_std(stat(agg, "macro.observed.partial.f1")) << "\n";
    out << "  labels  micro-f1 " << mean_std(stat(agg, "label.micro.f1")) << "  macro-f1 "
        << mean_std(stat(agg, "label.macro.f1")) << "\n";
    out << "  instances dice-mean " << mean_std(stat(agg, "instance.dice_mean"))
        << "  f1-pooled " << mean_std(stat(agg, "instance.f1_pooled")) << "\n";
    if (!agg.per_fold_averaged.empty()) {
        auto it = agg.per_fold_averaged.find("exact.accuracy");
        if (it != agg.per_fold_averaged.end())
            out << "  per-fold-averaged exact accuracy " << mean_std(it->second) << "\n";
    }
    return out.str();
}

std::string render_label_table(const AggregateReport& agg,
                               const std::vector<std::string>& labels) {
    std::ostringstream out;
    out << pad("label", 10) << pad("precision", 14) << pad("recall", 14) << pad("f1", 14)
        << "accuracy\n";
    for (const auto& name : labels) {
        out << pad(name, 10) << pad(mean_std(stat(agg, "label." + name + ".precision")), 14)
            << pad(mean_std(stat(agg, "label." + name + ".recall")), 14)
            << pad(mean_std(stat(agg, "label." + name + ".f1")), 14)
            << mean_std(stat(agg, "label." + name + ".accuracy")) << "\n";
    }
    return out.str();
}

std::string render_set_table(const AggregateReport& agg,
                             const std::vector<std::string>& codes) {
    std::ostringstream out;
    out << pad("label set", 12) << pad("exact-f1", 14) << "partial-f1\n";
    for (const auto& code : codes) {
        out << pad(code, 12) << pad(mean_std(stat(agg, "set." + code + ".exact.f1")), 14)
            << mean_std(stat(agg, "set." + code + ".partial.f1")) << "\n";
    }
    return out.str();
}

std::string render_taxonomy(const TaxonomySummary& t) {
    std::ostringstream out;
    out << "errors: " << t.total_errors << " of " << (t.correct + t.total_errors)
        << " (correct " << t.correct << ")\n";
    out << "  by kind:     hallucination " << t.hallucination << ", omission " << t.omission
        << ", hybrid " << t.hybrid << "\n";
    out << "  by position: above diagonal " << t.upper_triangle << ", below diagonal "
        << t.lower_triangle << "\n";
    return out.str();
}

std::string render_drilldown(const LabelDrilldown& d, const std::string& label,
                             const LabelSchema& schema) {
    std::ostringstream out;
    out << "label " << label << ": " << d.hallucinations << " hallucinations, "
        << d.omissions << " omissions\n";
    for (const auto& t : d.top_transitions) {
        out << "  " << format_binary_code(t.truth, schema) << " -> "
            << format_binary_code(t.predicted, schema) << "  " << t.count << "\n";
    }
    return out.str();
}

std::string render_distribution(const DistributionSummary& stats, const LabelSchema& schema) {
    std::ostringstream out;
    out << "instances: " << stats.n << ", single labels: " << stats.total_single_labels
        << "\n";
    for (std::size_t i = 0; i < schema.size(); ++i) {
        char pct[16];
        std::snprintf(pct, sizeof(pct), "%.1f%%", stats.label_proportions[i] * 100.0);
        out << "  " << pad(schema.label(i), 10) << stats.label_counts[i] << " (" << pct
            << ")\n";
    }
    out << "cardinality histogram:";
    for (std::size_t c = 0; c < stats.cardinality_histogram.size(); ++c)
        out << " " << c << ":" << stats.cardinality_histogram[c];
    out << "\n";
    const PowerSetOrder order(schema.size());
    out << "label sets (" << (order.size() - stats.unobserved_sets.size()) << " of "
        << order.size() << " observed):\n";
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (stats.set_counts[k] == 0) continue;
        out << "  " << pad(format_binary_code(order.at(k), schema), 12)
            << pad(format_textual_code(order.at(k), schema), 16) << stats.set_counts[k]
            << "\n";
    }
    if (!stats.unobserved_sets.empty()) {
        out << "unobserved:";
        for (std::size_t k : stats.unobserved_sets)
            out << " " << format_binary_code(order.at(k), schema);
        out << "\n";
    }
    return out.str();
}

}  // namespace mlceval
