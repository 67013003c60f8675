#include "mlceval/metrics.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracle.hpp"

using namespace mlceval;

namespace {

const LabelSchema& schema() { return LabelSchema::suicidality(); }

AlignedPairs pairs_from_codes(const std::vector<std::pair<const char*, const char*>>& rows,
                              const LabelSchema& s = LabelSchema::suicidality()) {
    std::vector<AlignedPair> pairs;
    for (std::size_t i = 0; i < rows.size(); ++i)
        pairs.push_back(AlignedPair{"p" + std::to_string(i),
                                    parse_binary_code(rows[i].first, s),
                                    parse_binary_code(rows[i].second, s)});
    return AlignedPairs(s, std::move(pairs));
}

AlignedPairs random_pairs(std::mt19937& rng, const LabelSchema& s, std::size_t n) {
    const std::uint32_t m = 1u << s.size();
    std::vector<AlignedPair> pairs;
    for (std::size_t i = 0; i < n; ++i)
        pairs.push_back(AlignedPair{"r" + std::to_string(i), LabelSet(s.size(), rng() % m),
                                    LabelSet(s.size(), rng() % m)});
    return AlignedPairs(s, std::move(pairs));
}

constexpr double kTol = 1e-12;

}  // namespace

TEST_CASE("label counts and PRF") {
    const AlignedPairs pairs = pairs_from_codes({
        {"1-0-0-0", "1-0-0-0"},
        {"0-1-0-0", "1-0-0-0"},
        {"0-0-0-0", "0-0-0-0"},
    });
    const LabelMetrics si = label_prf(pairs, "SI");
    CHECK(si.counts.tp == 1);
    CHECK(si.counts.fp == 1);
    CHECK(si.counts.fn == 0);
    CHECK(si.counts.tn == 1);
    CHECK(si.prf.precision == doctest::Approx(0.5).epsilon(kTol));
    CHECK(si.prf.recall == doctest::Approx(1.0).epsilon(kTol));
    CHECK(si.prf.f1 == doctest::Approx(2.0 / 3.0).epsilon(kTol));
    CHECK(si.accuracy == doctest::Approx(2.0 / 3.0).epsilon(kTol));

    // label never true and never predicted: zero-denominator convention
    const LabelMetrics es = label_prf(pairs, "ES");
    CHECK(es.prf.precision == 0.0);
    CHECK(es.prf.recall == 0.0);
    CHECK(es.prf.f1 == 0.0);
    CHECK(es.accuracy == 1.0);

    CHECK_THROWS_AS(label_prf(pairs, "XX"), ValidationError);
}

TEST_CASE("perfect run scores one everywhere") {
    const AlignedPairs pairs = pairs_from_codes({
        {"1-0-1-0", "1-0-1-0"},
        {"0-1-0-0", "0-1-0-0"},
        {"0-0-0-0", "0-0-0-0"},
    });
    const EvalReport rep = evaluate(pairs);
    CHECK(rep.exact_accuracy == 1.0);
    CHECK(rep.partial_accuracy == 1.0);
    CHECK(rep.partial_micro.f1 == 1.0);
    CHECK(rep.macro_observed.exact.f1 == 1.0);
    CHECK(rep.macro_observed.partial.f1 == 1.0);
    CHECK(rep.instance_dice_mean == 1.0);
    CHECK(rep.self_check_ok);
    for (const auto& e : rep.per_label) {
        CHECK(e.accuracy == 1.0);
        // zero-denominator convention: a label with no support scores 0
        if (e.prf.support > 0) CHECK(e.prf.f1 == 1.0);
        else CHECK(e.prf.f1 == 0.0);
    }
}

TEST_CASE("instance scores") {
    const LabelSet t = make_label_set(schema(), {"SI", "SA"});
    const LabelSet p = make_label_set(schema(), {"SI"});
    const InstanceScores s = instance_scores(t, p);
    CHECK(s.dice == doctest::Approx(2.0 / 3.0).epsilon(kTol));
    CHECK(s.hamming == doctest::Approx(0.75).epsilon(kTol));

    const InstanceScores same = instance_scores(t, t);
    CHECK(same.dice == 1.0);
    CHECK(same.hamming == 1.0);

    const InstanceScores disjoint =
        instance_scores(make_label_set(schema(), {"SI"}), make_label_set(schema(), {"SA"}));
    CHECK(disjoint.dice == 0.0);
    CHECK(disjoint.hamming == 0.5);

    const InstanceScores both_empty = instance_scores(LabelSet(4), LabelSet(4));
    CHECK(both_empty.dice == 1.0);
    CHECK(both_empty.hamming == 1.0);

    CHECK_THROWS_AS(instance_scores(LabelSet(4), LabelSet(3)), ValidationError);
}

TEST_CASE("label-set counts with partial credit") {
    const PowerSetOrder order = enumerate_powerset(schema());
    SUBCASE("superset prediction splits credit") {
        const AlignedPairs pairs = pairs_from_codes({{"1-1-0-0", "1-0-0-0"}});
        const SetLevelCounts counts = labelset_counts(pairs, order);
        const std::size_t si = order.index_of(make_label_set(schema(), {"SI"}));
        const std::size_t si_sa = order.index_of(make_label_set(schema(), {"SI", "SA"}));
        CHECK(counts.at(si).fp == 1);
        CHECK(counts.at(si).ptp_fp == doctest::Approx(2.0 / 3.0).epsilon(kTol));
        CHECK(counts.at(si_sa).fn == 1);
        CHECK(counts.at(si_sa).ptp_fn == doctest::Approx(2.0 / 3.0).epsilon(kTol));
    }
    SUBCASE("disjoint prediction earns nothing") {
        const AlignedPairs pairs = pairs_from_codes({{"1-0-0-0", "0-1-0-0"}});
        const SetLevelCounts counts = labelset_counts(pairs, order);
        const std::size_t sa = order.index_of(make_label_set(schema(), {"SA"}));
        CHECK(counts.at(sa).fp == 1);
        CHECK(counts.at(sa).ptp_fp == 0.0);
    }
    SUBCASE("perfect predictions have no error mass") {
        const AlignedPairs pairs = pairs_from_codes({
            {"0-1-0-0", "0-1-0-0"}, {"0-1-0-0", "0-1-0-0"}, {"1-0-0-0", "1-0-0-0"}});
        const SetLevelCounts counts = labelset_counts(pairs, order);
        for (std::size_t k = 0; k < order.size(); ++k) {
            CHECK(counts.at(k).fp == 0);
            CHECK(counts.at(k).fn == 0);
            CHECK(counts.at(k).ptp_fp == 0.0);
        }
        const std::size_t sa = order.index_of(make_label_set(schema(), {"SA"}));
        CHECK(counts.at(sa).tp == 2);
    }
}

TEST_CASE("per-set exact and partial PRF") {
    // two instances truly {SA}; one predicted {SA}, one predicted {SI,SA}
    const AlignedPairs pairs = pairs_from_codes({
        {"0-1-0-0", "0-1-0-0"},
        {"0-1-0-0", "1-1-0-0"},
    });
    const PowerSetOrder order = enumerate_powerset(schema());
    const SetLevelCounts counts = labelset_counts(pairs, order);
    const std::size_t sa = order.index_of(make_label_set(schema(), {"SA"}));

    const PRF exact = labelset_prf_exact(counts, sa);
    CHECK(exact.precision == doctest::Approx(1.0).epsilon(kTol));
    CHECK(exact.recall == doctest::Approx(0.5).epsilon(kTol));
    CHECK(exact.f1 == doctest::Approx(2.0 / 3.0).epsilon(kTol));
    CHECK(exact.support == 2);

    const PRF partial = labelset_prf_partial(counts, sa);
    CHECK(partial.precision == doctest::Approx(1.0).epsilon(kTol));
    CHECK(partial.recall == doctest::Approx(5.0 / 6.0).epsilon(kTol));
    CHECK(partial.f1 == doctest::Approx(10.0 / 11.0).epsilon(kTol));

    // a set never true and never predicted is flagged no-support with PRF 0
    const EvalReport rep = evaluate(pairs);
    const std::size_t full = order.index_of(LabelSet::full(4));
    CHECK(rep.per_set[full].no_support);
    CHECK(rep.per_set[full].exact.f1 == 0.0);
    CHECK(rep.per_set[full].partial.f1 == 0.0);
}

TEST_CASE("micro exact equals subset accuracy") {
    const AlignedPairs pairs = pairs_from_codes({
        {"1-0-0-0", "1-0-0-0"},
        {"0-1-0-0", "1-1-0-0"},
        {"0-0-0-0", "0-0-0-0"},
        {"1-1-0-0", "1-0-0-0"},
    });
    const MicroExact micro = micro_exact(labelset_counts(pairs, enumerate_powerset(schema())));
    CHECK(micro.accuracy == doctest::Approx(0.5).epsilon(kTol));
    CHECK(micro.precision == doctest::Approx(0.5).epsilon(kTol));
    CHECK(micro.recall == doctest::Approx(0.5).epsilon(kTol));
    CHECK(micro.f1 == doctest::Approx(0.5).epsilon(kTol));
}

TEST_CASE("micro partial identity and accuracy") {
    SUBCASE("single near-miss pair") {
        const AlignedPairs pairs = pairs_from_codes({{"1-1-0-0", "1-0-0-0"}});
        const MicroPartial micro =
            micro_partial(labelset_counts(pairs, enumerate_powerset(schema())), pairs);
        CHECK(micro.f1 == doctest::Approx(2.0 / 3.0).epsilon(kTol));
        CHECK(micro.precision == doctest::Approx(micro.f1).epsilon(kTol));
        CHECK(micro.recall == doctest::Approx(micro.f1).epsilon(kTol));
        CHECK(micro.partial_accuracy == doctest::Approx(0.75).epsilon(kTol));
    }
    SUBCASE("complement predictions score zero") {
        const AlignedPairs pairs = pairs_from_codes({
            {"1-1-0-0", "0-0-1-1"},
            {"0-0-0-0", "1-1-1-1"},
        });
        const MicroPartial micro =
            micro_partial(labelset_counts(pairs, enumerate_powerset(schema())), pairs);
        CHECK(micro.f1 == 0.0);
        CHECK(micro.partial_accuracy == 0.0);
    }
}

TEST_CASE("macro policies") {
    // two observed sets, f1 1 and 0
    const AlignedPairs pairs = pairs_from_codes({
        {"1-0-0-0", "1-0-0-0"},
        {"0-1-0-0", "0-0-1-0"},
    });
    const EvalReport rep = evaluate(pairs);
    // observed: {SI} (f1 1), {SA} (0), {ES} (0) -> mean 1/3
    CHECK(rep.macro_observed.denominator == 3);
    CHECK(rep.macro_observed.exact.f1 == doctest::Approx(1.0 / 3.0).epsilon(kTol));
    // truth-supported: {SI}, {SA}
    CHECK(rep.macro_truth_supported.denominator == 2);
    CHECK(rep.macro_truth_supported.exact.f1 == doctest::Approx(0.5).epsilon(kTol));
    // full power set divides by M = 16
    CHECK(rep.macro_full.denominator == 16);
    CHECK(rep.macro_full.exact.f1 == doctest::Approx(1.0 / 16.0).epsilon(kTol));
}

TEST_CASE("PTP contribution equals the dice form (exhaustive over L=4 pairs)") {
    for (std::uint32_t a = 0; a < 16; ++a) {
        for (std::uint32_t b = 0; b < 16; ++b) {
            const LabelSet truth(4, a), predicted(4, b);
            if (truth.cardinality() + predicted.cardinality() == 0) continue;
            const double ptp_form = instance_scores(truth, predicted).dice;
            const double dice_form =
                2.0 * static_cast<double>(truth.intersect(predicted).cardinality()) /
                static_cast<double>(truth.cardinality() + predicted.cardinality());
            CHECK(std::fabs(ptp_form - dice_form) <= kTol);
        }
    }
}

TEST_CASE("identity properties on random runs") {
    std::mt19937 rng(2024);
    for (int round = 0; round < 200; ++round) {
        const std::size_t n = 1 + rng() % 50;
        const AlignedPairs pairs = random_pairs(rng, schema(), n);
        const EvalReport rep = evaluate(pairs);
        CHECK(rep.self_check_ok);
        CHECK(std::fabs(rep.exact_micro.precision - rep.exact_accuracy) <= kTol);
        CHECK(std::fabs(rep.exact_micro.f1 - rep.exact_accuracy) <= kTol);
        CHECK(std::fabs(rep.partial_micro.precision - rep.partial_micro.recall) <= kTol);
        CHECK(std::fabs(rep.partial_accuracy - rep.instance_hamming_mean) <= kTol);
        CHECK(std::fabs(rep.partial_accuracy - rep.label_micro_accuracy) <= kTol);
        for (const auto& e : rep.per_set) CHECK(e.exact.f1 <= e.partial.f1 + kTol);
        for (const auto& [key, value] : rep.flat()) {
            CHECK(value >= -kTol);
            CHECK(value <= 1.0 + kTol);
        }
    }
}

TEST_CASE("engine matches the naive reference on random small corpora") {
    std::mt19937 rng(99);
    const std::vector<std::vector<std::string>> schemas{
        {"A"}, {"A", "B"}, {"A", "B", "C"}};
    for (int round = 0; round < 100; ++round) {
        const auto& names = schemas[rng() % schemas.size()];
        const LabelSchema s(names);
        const std::size_t n = 1 + rng() % 6;
        const AlignedPairs pairs = random_pairs(rng, s, n);

        std::vector<oracle::Pair> opairs;
        for (const auto& p : pairs.pairs()) {
            oracle::Pair op;
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (p.truth.contains(i)) op.truth.insert(s.label(i));
                if (p.predicted.contains(i)) op.predicted.insert(s.label(i));
            }
            opairs.push_back(std::move(op));
        }
        const oracle::Reference ref = oracle::compute(names, opairs);
        const auto flat = evaluate(pairs).flat();
        for (const auto& [key, expected] : ref.values) {
            REQUIRE_MESSAGE(flat.count(key) == 1, key);
            CHECK_MESSAGE(std::fabs(flat.at(key) - expected) <= kTol, key);
        }
    }
}

TEST_CASE("report serialization round trip") {
    std::mt19937 rng(5);
    const AlignedPairs pairs = random_pairs(rng, schema(), 40);
    EvalOptions options;
    options.manifest.model = "demo";
    options.manifest.strategy = Strategy::tune;
    options.manifest.repeat = 1;
    options.manifest.fold = 3;
    const EvalReport rep = evaluate(pairs, options);

    const EvalReport back = EvalReport::from_json(rep.to_json());
    CHECK(back.n == rep.n);
    CHECK(back.manifest.model == "demo");
    CHECK(back.manifest.fold == 3);
    CHECK(back.schema_digest == rep.schema_digest);
    // serialized values are rounded to 6 decimals
    for (const auto& [key, value] : rep.flat())
        CHECK(std::fabs(back.flat().at(key) - value) <= 5e-7);

    const std::string tsv = rep.to_tsv();
    CHECK(tsv.find("exact.accuracy\t") != std::string::npos);
}

TEST_CASE("aggregation across runs") {
    std::mt19937 rng(11);
    const AlignedPairs pairs = random_pairs(rng, schema(), 30);

    SUBCASE("identical reports have zero std") {
        EvalReport rep = evaluate(pairs);
        const AggregateReport agg = aggregate_runs({rep, rep, rep});
        CHECK(agg.runs == 3);
        const AggregateStat& acc = agg.metrics.at("exact.accuracy");
        CHECK(acc.mean == doctest::Approx(rep.exact_accuracy).epsilon(kTol));
        CHECK(acc.stddev == 0.0);
        CHECK(acc.count == 3);
    }
    SUBCASE("sample standard deviation uses n-1") {
        EvalReport a = evaluate(pairs);
        EvalReport b = a;
        a.exact_accuracy = 0.72;
        b.exact_accuracy = 0.74;
        const AggregateReport agg = aggregate_runs({a, b});
        const AggregateStat& acc = agg.metrics.at("exact.accuracy");
        CHECK(acc.mean == doctest::Approx(0.73).epsilon(kTol));
        CHECK(acc.stddev == doctest::Approx(std::sqrt(0.0002)).epsilon(1e-9));
    }
    SUBCASE("single report aggregates to itself") {
        const EvalReport rep = evaluate(pairs);
        const AggregateReport agg = aggregate_runs({rep});
        for (const auto& [key, value] : rep.flat()) {
            CHECK(agg.metrics.at(key).mean == doctest::Approx(value).epsilon(kTol));
            CHECK(agg.metrics.at(key).stddev == 0.0);
        }
    }
    SUBCASE("mixed schemas are rejected") {
        const LabelSchema other({"A", "B", "C", "D"});
        std::mt19937 rng2(3);
        const EvalReport a = evaluate(pairs);
        const EvalReport b = evaluate(random_pairs(rng2, other, 10));
        CHECK_THROWS_AS(aggregate_runs({a, b}), ValidationError);
        CHECK_THROWS_AS(aggregate_runs({}), ValidationError);
    }
    SUBCASE("fold-aware aggregation emits the per-repeat variant") {
        std::vector<EvalReport> reports;
        for (int repeat = 0; repeat < 2; ++repeat) {
            for (int fold = 0; fold < 3; ++fold) {
                std::mt19937 r(static_cast<unsigned>(repeat * 3 + fold));
                EvalOptions options;
                options.manifest.repeat = repeat;
                options.manifest.fold = fold;
                reports.push_back(evaluate(random_pairs(r, schema(), 20), options));
            }
        }
        const AggregateReport agg = aggregate_runs(reports);
        CHECK(agg.metrics.at("exact.accuracy").count == 6);
        REQUIRE(!agg.per_fold_averaged.empty());
        CHECK(agg.per_fold_averaged.at("exact.accuracy").count == 2);
        // per-repeat means of the fold means equal the flat mean here (equal group sizes)
        CHECK(agg.per_fold_averaged.at("exact.accuracy").mean ==
              doctest::Approx(agg.metrics.at("exact.accuracy").mean).epsilon(1e-9));
    }
}

TEST_CASE("evaluate rejects empty input") {
    CHECK_THROWS_AS(evaluate(AlignedPairs(schema(), {})), ValidationError);
}
