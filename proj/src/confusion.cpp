#include "mlceval/confusion.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

namespace mlceval {

std::string to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::correct: return "correct";
        case ErrorKind::hallucination: return "hallucination";
        case ErrorKind::omission: return "omission";
        case ErrorKind::hybrid: return "hybrid";
    }
    return "correct";
}

ErrorKind classify_error(const LabelSet& truth, const LabelSet& predicted) {
    const bool added = !predicted.minus(truth).empty();
    const bool missed = !truth.minus(predicted).empty();
    if (added && missed) return ErrorKind::hybrid;
    if (added) return ErrorKind::hallucination;
    if (missed) return ErrorKind::omission;
    return ErrorKind::correct;
}

PowerSetConfusion::PowerSetConfusion(PowerSetOrder order, std::vector<std::int64_t> cells,
                                     std::int64_t n)
    : order_(std::move(order)), cells_(std::move(cells)), n_(n) {
    if (cells_.size() != order_.size() * order_.size())
        throw ValidationError("confusion matrix cell count mismatch");
    const std::int64_t total = std::accumulate(cells_.begin(), cells_.end(), std::int64_t{0});
    if (total != n_)
        throw ValidationError("confusion matrix cells sum to " + std::to_string(total) +
                              ", expected " + std::to_string(n_));
}

std::int64_t PowerSetConfusion::at(std::size_t row, std::size_t col) const {
    if (row >= m() || col >= m())
        throw ValidationError("confusion matrix index out of range");
    return cells_[row * m() + col];
}

std::int64_t PowerSetConfusion::row_sum(std::size_t row) const {
    std::int64_t sum = 0;
    for (std::size_t c = 0; c < m(); ++c) sum += at(row, c);
    return sum;
}

std::int64_t PowerSetConfusion::col_sum(std::size_t col) const {
    std::int64_t sum = 0;
    for (std::size_t r = 0; r < m(); ++r) sum += at(r, col);
    return sum;
}

std::int64_t PowerSetConfusion::trace() const {
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < m(); ++i) sum += at(i, i);
    return sum;
}

PowerSetConfusion build_confusion(const AlignedPairs& pairs, const PowerSetOrder& order) {
    if (pairs.size() == 0)
        throw ValidationError("confusion matrix requires at least one pair");
    const std::size_t m = order.size();
    std::vector<std::int64_t> cells(m * m, 0);
    for (const auto& p : pairs.pairs())
        cells[order.index_of(p.truth) * m + order.index_of(p.predicted)] += 1;
    return PowerSetConfusion(order, std::move(cells),
                             static_cast<std::int64_t>(pairs.size()));
}

TaxonomySummary taxonomy_summary(const AlignedPairs& pairs, const PowerSetOrder& order) {
    TaxonomySummary s;
    for (const auto& p : pairs.pairs()) {
        switch (classify_error(p.truth, p.predicted)) {
            case ErrorKind::correct: ++s.correct; break;
            case ErrorKind::hallucination: ++s.hallucination; break;
            case ErrorKind::omission: ++s.omission; break;
            case ErrorKind::hybrid: ++s.hybrid; break;
        }
        const std::size_t r = order.index_of(p.truth);
        const std::size_t c = order.index_of(p.predicted);
        if (c > r) ++s.upper_triangle;
        if (c < r) ++s.lower_triangle;
    }
    s.total_errors = s.hallucination + s.omission + s.hybrid;
    return s;
}

LabelDrilldown label_drilldown(const AlignedPairs& pairs, std::string_view label,
                               std::size_t top_n) {
    const std::size_t pos = pairs.schema().index_of(label);
    const PowerSetOrder order = enumerate_powerset(pairs.schema());

    LabelDrilldown d;
    // keyed by (truth index, predicted index) for canonical tie-breaking.
    std::map<std::pair<std::size_t, std::size_t>, std::int64_t> flips;
    for (const auto& p : pairs.pairs()) {
        const bool truth = p.truth.contains(pos);
        const bool pred = p.predicted.contains(pos);
        if (truth == pred) continue;
        if (pred) ++d.hallucinations;
        else ++d.omissions;
        flips[{order.index_of(p.truth), order.index_of(p.predicted)}] += 1;
    }

    std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::int64_t>> sorted(
        flips.begin(), flips.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [key, count] : sorted) {
        if (d.top_transitions.size() >= top_n) break;
        d.top_transitions.push_back(
            Transition{order.at(key.first), order.at(key.second), count});
    }
    return d;
}

std::int64_t group_query(const AlignedPairs& pairs, const LabelSetPattern& truth_pattern,
                         const LabelSetPattern& predicted_pattern) {
    std::int64_t count = 0;
    for (const auto& p : pairs.pairs())
        if (truth_pattern.matches(p.truth) && predicted_pattern.matches(p.predicted))
            ++count;
    return count;
}

// Exports -----------------------------------------------------------------------

namespace {

std::vector<std::size_t> visible_indices(const PowerSetConfusion& confusion, bool compact) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < confusion.m(); ++i) {
        if (!compact || confusion.row_sum(i) > 0 || confusion.col_sum(i) > 0)
            idx.push_back(i);
    }
    return idx;
}

}  // namespace

std::string confusion_to_table(const PowerSetConfusion& confusion, const LabelSchema& schema,
                               bool include_textual, bool compact) {
    const auto idx = visible_indices(confusion, compact);
    std::ostringstream out;
    auto axis_label = [&](std::size_t i) {
        const LabelSet& set = confusion.order().at(i);
        std::string s = format_binary_code(set, schema) + " " +
                        format_semantic_code(set, schema);
        if (include_textual) s += " " + format_textual_code(set, schema);
        return s;
    };
    out << "true\\predicted";
    for (std::size_t c : idx) out << '\t' << axis_label(c);
    out << "\trow_total\n";
    for (std::size_t r : idx) {
        out << axis_label(r);
        for (std::size_t c : idx) out << '\t' << confusion.at(r, c);
        out << '\t' << confusion.row_sum(r) << '\n';
    }
    out << "col_total";
    for (std::size_t c : idx) out << '\t' << confusion.col_sum(c);
    out << '\t' << confusion.n() << '\n';
    return out.str();
}

std::string confusion_to_svg(const PowerSetConfusion& confusion, const LabelSchema& schema,
                             bool compact) {
    const auto idx = visible_indices(confusion, compact);
    const std::size_t m = idx.size();
    const int cell = 34;
    const int label_w = 170;
    const int label_h = 150;
    const int width = label_w + cell * static_cast<int>(m) + 10;
    const int height = label_h + cell * static_cast<int>(m) + 10;

    std::int64_t max_count = 1;
    for (std::size_t r : idx)
        for (std::size_t c : idx) max_count = std::max(max_count, confusion.at(r, c));

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"monospace\" font-size=\"10\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

    auto code = [&](std::size_t i) {
        const LabelSet& set = confusion.order().at(i);
        return format_binary_code(set, schema) + " " + format_semantic_code(set, schema);
    };

    // Column headers, rotated.
    for (std::size_t j = 0; j < m; ++j) {
        const int x = label_w + static_cast<int>(j) * cell + cell / 2 + 3;
        out << "<text x=\"" << x << "\" y=\"" << label_h - 6 << "\" text-anchor=\"start\""
            << " transform=\"rotate(-60 " << x << " " << label_h - 6 << ")\">" << code(idx[j])
            << "</text>\n";
    }
    for (std::size_t i = 0; i < m; ++i) {
        const int y = label_h + static_cast<int>(i) * cell + cell / 2 + 4;
        out << "<text x=\"" << label_w - 6 << "\" y=\"" << y
            << "\" text-anchor=\"end\">" << code(idx[i]) << "</text>\n";
        for (std::size_t j = 0; j < m; ++j) {
            const std::int64_t v = confusion.at(idx[i], idx[j]);
            const int x = label_w + static_cast<int>(j) * cell;
            const int yy = label_h + static_cast<int>(i) * cell;
            // Diagonal in blue, errors in red; intensity scales with count.
            int shade = 255;
            if (v > 0) {
                const double t = static_cast<double>(v) / static_cast<double>(max_count);
                shade = 255 - static_cast<int>(t * 180.0);
            }
            char color[8];
            if (idx[i] == idx[j])
                std::snprintf(color, sizeof(color), "#%02x%02xff", shade, shade);
            else
                std::snprintf(color, sizeof(color), "#ff%02x%02x", shade, shade);
            out << "<rect x=\"" << x << "\" y=\"" << yy << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\"" << (v > 0 ? color : "#ffffff")
                << "\" stroke=\"#cccccc\"/>\n";
            if (v > 0) {
                out << "<text x=\"" << x + cell / 2 << "\" y=\"" << yy + cell / 2 + 4
                    << "\" text-anchor=\"middle\">" << v << "</text>\n";
            }
        }
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace mlceval
