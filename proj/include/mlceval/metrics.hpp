#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlceval/dataset.hpp"
#include "mlceval/labelspace.hpp"

namespace mlceval {

// Binary counts for one label over N instances; tp+fp+fn+tn = N.
struct BinaryCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;
};

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
};

// Harmonic mean with the zero convention: f1 = 0 when p + r = 0.
double f1_score(double precision, double recall);

struct LabelMetrics {
    BinaryCounts counts;
    PRF prf;
    double accuracy = 0.0;
};

struct InstanceScores {
    double dice = 0.0;     // |Y∩Ŷ| / (|Y∩Ŷ| + (|Ŷ\Y| + |Y\Ŷ|)/2); dice(∅,∅) = 1
    double hamming = 0.0;  // fraction of positions (present and absent) predicted correctly
};

// Per label set k: exact indicator counts plus fractional partial-match credit.
// ptp_fp sums the overlap score of instances predicted as k but truly different;
// ptp_fn is symmetric over instances truly k but predicted different.
struct SetCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    double ptp_fp = 0.0;
    double ptp_fn = 0.0;
};

class SetLevelCounts {
public:
    SetLevelCounts(PowerSetOrder order, std::vector<SetCounts> per_set, std::int64_t n);

    const PowerSetOrder& order() const noexcept { return order_; }
    const std::vector<SetCounts>& per_set() const noexcept { return per_set_; }
    const SetCounts& at(std::size_t k) const { return per_set_.at(k); }
    std::int64_t n() const noexcept { return n_; }

private:
    PowerSetOrder order_;
    std::vector<SetCounts> per_set_;
    std::int64_t n_;
};

BinaryCounts label_counts(const AlignedPairs& pairs, std::size_t label_pos);
LabelMetrics label_prf(const AlignedPairs& pairs, std::string_view label);

InstanceScores instance_scores(const LabelSet& truth, const LabelSet& predicted);

SetLevelCounts labelset_counts(const AlignedPairs& pairs, const PowerSetOrder& order);

PRF labelset_prf_exact(const SetLevelCounts& counts, std::size_t k);
PRF labelset_prf_partial(const SetLevelCounts& counts, std::size_t k);

// Micro averaging over label sets, exact match. Precision, recall and F1 all
// equal the subset accuracy; the identity is asserted at computation time.
struct MicroExact {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

MicroExact micro_exact(const SetLevelCounts& counts);

// Micro averaging over label sets, partial match. Precision = recall = F1.
// partial_accuracy is the mean per-instance hamming accuracy, which also
// equals the accuracy pooled over single-label positions.
struct MicroPartial {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double partial_accuracy = 0.0;
};

MicroPartial micro_partial(const SetLevelCounts& counts, const AlignedPairs& pairs);

// Denominator policy for macro averaging over label sets.
//   observed:        sets with tp + fp + fn > 0
//   truth_supported: sets with tp + fn > 0
//   full_powerset:   all M = 2^L sets
enum class MacroPolicy { observed, truth_supported, full_powerset };

std::string to_string(MacroPolicy p);
MacroPolicy macro_policy_from_string(std::string_view text);

PRF macro_average(const std::vector<PRF>& per_set, const SetLevelCounts& counts,
                  MacroPolicy policy);

// Full report -----------------------------------------------------------------

struct LabelReportEntry {
    std::string name;
    BinaryCounts counts;
    PRF prf;
    double accuracy = 0.0;
};

struct SetReportEntry {
    std::string binary;
    std::string textual;
    SetCounts counts;
    std::int64_t support = 0;  // tp + fn
    bool no_support = false;   // never true and never predicted
    PRF exact;
    PRF partial;
};

struct MacroBlock {
    PRF exact;
    PRF partial;
    std::int64_t denominator = 0;
};

struct EvalReport {
    std::string version = "mlceval/1";
    RunManifest manifest;
    std::string schema_digest;
    std::vector<std::string> labels;
    std::int64_t n = 0;
    std::int64_t m = 0;
    std::int64_t parse_failures = 0;

    std::vector<LabelReportEntry> per_label;
    PRF label_micro;
    double label_micro_accuracy = 0.0;
    PRF label_macro;
    double label_macro_accuracy = 0.0;

    double instance_dice_mean = 0.0;    // mean per-instance overlap score
    double instance_f1_pooled = 0.0;    // 2·Σ|∩| / Σ(|Y|+|Ŷ|)
    double instance_hamming_mean = 0.0;

    std::vector<SetReportEntry> per_set;
    double exact_accuracy = 0.0;
    MicroExact exact_micro;
    double partial_accuracy = 0.0;
    MicroPartial partial_micro;
    MacroBlock macro_observed;
    MacroBlock macro_truth_supported;
    MacroBlock macro_full;

    bool self_check_ok = false;

    nlohmann::ordered_json to_json() const;
    static EvalReport from_json(const nlohmann::ordered_json& doc);
    // Flat metric-path -> value view, the unit of aggregation.
    std::map<std::string, double> flat() const;
    std::string to_tsv() const;
};

struct EvalOptions {
    RunManifest manifest;
    std::int64_t parse_failures = 0;
};

EvalReport evaluate(const AlignedPairs& pairs, const EvalOptions& options = {});

// Mean / standard deviation across repeated runs ------------------------------

struct AggregateStat {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n-1); 0 when count == 1
    std::int64_t count = 0;
};

struct AggregateReport {
    std::string version = "mlceval/1";
    std::string schema_digest;
    std::int64_t runs = 0;
    std::map<std::string, AggregateStat> metrics;
    // Present when the input reports carry fold indices: metrics first averaged
    // across folds within each repeat, then mean/std across repeats.
    std::map<std::string, AggregateStat> per_fold_averaged;

    nlohmann::ordered_json to_json() const;
    static AggregateReport from_json(const nlohmann::ordered_json& doc);
    std::string to_tsv() const;
};

AggregateReport aggregate_runs(const std::vector<EvalReport>& reports);

}  // namespace mlceval
