#pragma once

#include <string>
#include <vector>

#include "mlceval/confusion.hpp"
#include "mlceval/metrics.hpp"

namespace mlceval {

// Plain-text tables for terminal reports: an overall block (exact/partial
// accuracy, micro/macro F1), a per-label table and a per-label-set table.
// Aggregate variants print mean ± std.

std::string render_overall_table(const EvalReport& report);
std::string render_label_table(const EvalReport& report);
std::string render_set_table(const EvalReport& report);

std::string render_overall_table(const AggregateReport& agg);
std::string render_label_table(const AggregateReport& agg, const std::vector<std::string>& labels);
std::string render_set_table(const AggregateReport& agg, const std::vector<std::string>& codes);

std::string render_taxonomy(const TaxonomySummary& taxonomy);
std::string render_drilldown(const LabelDrilldown& drilldown, const std::string& label,
                             const LabelSchema& schema);
std::string render_distribution(const DistributionSummary& stats, const LabelSchema& schema);

}  // namespace mlceval
