#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlceval/dataset.hpp"
#include "mlceval/labelspace.hpp"

namespace mlceval {

enum class ErrorKind { correct, hallucination, omission, hybrid };

std::string to_string(ErrorKind kind);

// hallucination: prediction adds labels and misses none (Ŷ\Y ≠ ∅, Y\Ŷ = ∅);
// omission: the converse; hybrid: both at once; correct: identical sets.
ErrorKind classify_error(const LabelSet& truth, const LabelSet& predicted);

// M×M count matrix over canonically ordered label sets.
// Row = true set, column = predicted set.
class PowerSetConfusion {
public:
    PowerSetConfusion(PowerSetOrder order, std::vector<std::int64_t> cells, std::int64_t n);

    const PowerSetOrder& order() const noexcept { return order_; }
    std::size_t m() const noexcept { return order_.size(); }
    std::int64_t n() const noexcept { return n_; }
    std::int64_t at(std::size_t row, std::size_t col) const;
    std::int64_t row_sum(std::size_t row) const;
    std::int64_t col_sum(std::size_t col) const;
    std::int64_t trace() const;

private:
    PowerSetOrder order_;
    std::vector<std::int64_t> cells_;  // row-major
    std::int64_t n_;
};

PowerSetConfusion build_confusion(const AlignedPairs& pairs, const PowerSetOrder& order);

struct TaxonomySummary {
    std::int64_t correct = 0;
    std::int64_t hallucination = 0;
    std::int64_t omission = 0;
    std::int64_t hybrid = 0;
    std::int64_t upper_triangle = 0;  // errors strictly above the diagonal
    std::int64_t lower_triangle = 0;  // errors strictly below
    std::int64_t total_errors = 0;
};

TaxonomySummary taxonomy_summary(const AlignedPairs& pairs, const PowerSetOrder& order);

struct Transition {
    LabelSet truth;
    LabelSet predicted;
    std::int64_t count = 0;
};

struct LabelDrilldown {
    std::int64_t hallucinations = 0;  // instances where the label is predicted but not true
    std::int64_t omissions = 0;       // instances where the label is true but not predicted
    std::vector<Transition> top_transitions;  // error cells flipping the label, count desc
};

LabelDrilldown label_drilldown(const AlignedPairs& pairs, std::string_view label,
                               std::size_t top_n = 10);

// Count of pairs whose truth matches the first pattern and prediction the second.
std::int64_t group_query(const AlignedPairs& pairs, const LabelSetPattern& truth_pattern,
                         const LabelSetPattern& predicted_pattern);

// Exports. Both are deterministic byte-for-byte for a given input.
std::string confusion_to_table(const PowerSetConfusion& confusion, const LabelSchema& schema,
                               bool include_textual = false, bool compact = false);
std::string confusion_to_svg(const PowerSetConfusion& confusion, const LabelSchema& schema,
                             bool compact = false);

}  // namespace mlceval
