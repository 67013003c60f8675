#include "mlceval/confusion.hpp"

#include <random>

#include "doctest.h"
#include "mlceval/metrics.hpp"
#include "mlceval/synth.hpp"

using namespace mlceval;

namespace {

const LabelSchema& schema() { return LabelSchema::suicidality(); }

AlignedPairs pairs_from_codes(const std::vector<std::pair<const char*, const char*>>& rows) {
    std::vector<AlignedPair> pairs;
    for (std::size_t i = 0; i < rows.size(); ++i)
        pairs.push_back(AlignedPair{"p" + std::to_string(i),
                                    parse_binary_code(rows[i].first, schema()),
                                    parse_binary_code(rows[i].second, schema())});
    return AlignedPairs(schema(), std::move(pairs));
}

}  // namespace

TEST_CASE("error kinds") {
    auto kind = [](const char* truth, const char* pred) {
        return classify_error(parse_binary_code(truth, schema()),
                              parse_binary_code(pred, schema()));
    };
    CHECK(kind("0-1-0-0", "1-1-0-0") == ErrorKind::hallucination);
    CHECK(kind("1-1-0-0", "1-0-0-0") == ErrorKind::omission);
    CHECK(kind("1-1-0-0", "1-0-0-1") == ErrorKind::hybrid);
    CHECK(kind("1-1-0-0", "1-1-0-0") == ErrorKind::correct);
}

TEST_CASE("hallucination and omission swap under truth/prediction exchange") {
    for (std::uint32_t a = 0; a < 16; ++a) {
        for (std::uint32_t b = 0; b < 16; ++b) {
            const LabelSet x(4, a), y(4, b);
            const ErrorKind forward = classify_error(x, y);
            const ErrorKind backward = classify_error(y, x);
            if (forward == ErrorKind::hallucination) CHECK(backward == ErrorKind::omission);
            if (forward == ErrorKind::omission) CHECK(backward == ErrorKind::hallucination);
            if (forward == ErrorKind::hybrid) CHECK(backward == ErrorKind::hybrid);
            if (forward == ErrorKind::correct) CHECK(backward == ErrorKind::correct);
        }
    }
}

TEST_CASE("confusion matrix structure") {
    const AlignedPairs pairs = pairs_from_codes({
        {"1-0-0-0", "1-0-0-0"},
        {"1-0-0-0", "1-1-0-0"},
        {"0-1-0-0", "0-1-0-0"},
    });
    const PowerSetOrder order = enumerate_powerset(schema());
    const PowerSetConfusion confusion = build_confusion(pairs, order);
    CHECK(confusion.n() == 3);
    CHECK(confusion.trace() == 2);
    const std::size_t si = order.index_of(make_label_set(schema(), {"SI"}));
    const std::size_t si_sa = order.index_of(make_label_set(schema(), {"SI", "SA"}));
    CHECK(confusion.at(si, si_sa) == 1);
    CHECK(confusion.row_sum(si) == 2);
    CHECK(confusion.col_sum(si_sa) == 1);
    // superset errors land above the diagonal
    CHECK(si < si_sa);
}

TEST_CASE("perfect run gives a diagonal matrix and empty taxonomy") {
    const AlignedPairs pairs = pairs_from_codes({
        {"1-0-0-0", "1-0-0-0"},
        {"0-0-1-1", "0-0-1-1"},
    });
    const PowerSetOrder order = enumerate_powerset(schema());
    const PowerSetConfusion confusion = build_confusion(pairs, order);
    CHECK(confusion.trace() == confusion.n());
    const TaxonomySummary t = taxonomy_summary(pairs, order);
    CHECK(t.total_errors == 0);
    CHECK(t.upper_triangle == 0);
    CHECK(t.lower_triangle == 0);
    const LabelDrilldown d = label_drilldown(pairs, "SI");
    CHECK(d.hallucinations == 0);
    CHECK(d.omissions == 0);
    CHECK(d.top_transitions.empty());
}

TEST_CASE("triangle law and marginals on random runs") {
    std::mt19937 rng(17);
    const PowerSetOrder order = enumerate_powerset(schema());
    for (int round = 0; round < 100; ++round) {
        const std::size_t n = 1 + rng() % 60;
        std::vector<AlignedPair> raw;
        for (std::size_t i = 0; i < n; ++i)
            raw.push_back(AlignedPair{"r" + std::to_string(i), LabelSet(4, rng() % 16),
                                      LabelSet(4, rng() % 16)});
        const AlignedPairs pairs(schema(), std::move(raw));
        const PowerSetConfusion confusion = build_confusion(pairs, order);
        const TaxonomySummary t = taxonomy_summary(pairs, order);

        CHECK(t.correct + t.total_errors == static_cast<std::int64_t>(n));
        CHECK(t.upper_triangle + t.lower_triangle == t.total_errors);
        CHECK(t.correct == confusion.trace());

        // marginals match truth/prediction frequencies
        std::vector<std::int64_t> row_freq(order.size(), 0), col_freq(order.size(), 0);
        for (const auto& p : pairs.pairs()) {
            row_freq[order.index_of(p.truth)] += 1;
            col_freq[order.index_of(p.predicted)] += 1;
        }
        for (std::size_t k = 0; k < order.size(); ++k) {
            CHECK(confusion.row_sum(k) == row_freq[k]);
            CHECK(confusion.col_sum(k) == col_freq[k]);
        }

        // strict-superset errors above, strict-subset errors below
        for (const auto& p : pairs.pairs()) {
            const std::size_t r = order.index_of(p.truth);
            const std::size_t c = order.index_of(p.predicted);
            if (p.truth.subset_of(p.predicted) && !(p.truth == p.predicted)) CHECK(c > r);
            if (p.predicted.subset_of(p.truth) && !(p.truth == p.predicted)) CHECK(c < r);
        }
    }
}

TEST_CASE("pure superset errors are all hallucinations above the diagonal") {
    std::mt19937 rng(23);
    std::vector<AlignedPair> raw;
    for (std::size_t i = 0; i < 40; ++i) {
        const std::uint32_t truth_bits = rng() % 15;  // never the full set
        std::uint32_t extra = rng() % 16;
        while ((extra & ~truth_bits) == 0) extra = rng() % 16;
        raw.push_back(AlignedPair{"s" + std::to_string(i), LabelSet(4, truth_bits),
                                  LabelSet(4, truth_bits | extra)});
    }
    const AlignedPairs pairs(schema(), std::move(raw));
    const TaxonomySummary t = taxonomy_summary(pairs, enumerate_powerset(schema()));
    CHECK(t.hallucination == t.total_errors);
    CHECK(t.upper_triangle == t.total_errors);
    CHECK(t.lower_triangle == 0);
}

TEST_CASE("label drilldown") {
    const AlignedPairs pairs = pairs_from_codes({
        {"0-0-0-0", "1-0-0-0"},
    });
    const LabelDrilldown d = label_drilldown(pairs, "SI");
    CHECK(d.hallucinations == 1);
    CHECK(d.omissions == 0);
    REQUIRE(d.top_transitions.size() == 1);
    CHECK(d.top_transitions[0].count == 1);
    CHECK_THROWS_AS(label_drilldown(pairs, "XX"), ValidationError);
}

TEST_CASE("group query") {
    const AlignedPairs pairs = pairs_from_codes({
        {"0-1-0-0", "1-1-0-0"},
        {"0-1-0-1", "1-1-0-1"},
        {"0-0-0-0", "0-0-0-0"},
    });
    const auto truth_pat = parse_pattern("0-1-0-*", schema());
    const auto pred_pat = parse_pattern("1-1-0-*", schema());
    CHECK(group_query(pairs, truth_pat, pred_pat) == 2);
    const auto all = parse_pattern("*-*-*-*", schema());
    CHECK(group_query(pairs, all, all) == 3);
    CHECK(group_query(pairs, parse_pattern("1-1-1-1", schema()),
                      parse_pattern("0-0-0-0", schema())) == 0);
}

TEST_CASE("figure4 fixture reproduces its pinned structure") {
    const FixtureSpec spec = figure4_fixture_spec();
    const AlignedPairs pairs = build_fixture(spec);
    REQUIRE(pairs.size() == 500);
    const PowerSetOrder order = enumerate_powerset(schema());
    const PowerSetConfusion confusion = build_confusion(pairs, order);

    CHECK(confusion.trace() == 383);
    const std::size_t sa = order.index_of(parse_binary_code("0-1-0-0", schema()));
    const std::size_t si_sa = order.index_of(parse_binary_code("1-1-0-0", schema()));
    CHECK(confusion.at(sa, si_sa) == 30);
    CHECK(confusion.row_sum(sa) == 62);

    const TaxonomySummary t = taxonomy_summary(pairs, order);
    CHECK(t.total_errors == 117);
    CHECK(t.upper_triangle == 86);
    CHECK(t.lower_triangle == 31);
    CHECK(t.hallucination == 80);
    CHECK(t.omission == 28);
    CHECK(t.hybrid == 9);

    const LabelDrilldown si = label_drilldown(pairs, "SI");
    CHECK(si.hallucinations == 48);
    CHECK(si.omissions == 3);
    CHECK(group_query(pairs, parse_pattern("0-1-0-*", schema()),
                      parse_pattern("1-1-0-*", schema())) == 38);

    // 7 of 11 true 0-0-0-1 misclassified, 5 of them with a spurious SA
    const std::size_t nssi = order.index_of(parse_binary_code("0-0-0-1", schema()));
    CHECK(confusion.row_sum(nssi) == 11);
    CHECK(confusion.at(nssi, nssi) == 4);
    std::int64_t with_sa = 0;
    for (const auto& p : pairs.pairs()) {
        if (!(order.index_of(p.truth) == nssi) || p.truth == p.predicted) continue;
        if (p.predicted.contains(schema().index_of("SA"))) ++with_sa;
    }
    CHECK(with_sa == 5);

    // exact accuracy from the same pairs
    const EvalReport rep = evaluate(pairs);
    CHECK(rep.exact_accuracy == doctest::Approx(0.766).epsilon(1e-12));
}

TEST_CASE("matrix exports are deterministic") {
    const AlignedPairs pairs = build_fixture(figure4_fixture_spec());
    const PowerSetConfusion confusion = build_confusion(pairs, enumerate_powerset(schema()));
    const std::string a = confusion_to_table(confusion, schema());
    const std::string b = confusion_to_table(confusion, schema());
    CHECK(a == b);
    CHECK(a.find("1-0-1-0 +SI-SA+ES-NSSI") != std::string::npos);
    const std::string svg = confusion_to_svg(confusion, schema());
    CHECK(svg == confusion_to_svg(confusion, schema()));
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);

    // compact view drops empty rows/cols; fixture observes 14 of 16 sets
    const std::string compact = confusion_to_table(confusion, schema(), false, true);
    CHECK(compact.find("0-1-1-1") == std::string::npos);
    const std::string full = confusion_to_table(confusion, schema(), false, false);
    CHECK(full.find("0-1-1-1") != std::string::npos);
}
