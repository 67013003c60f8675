#include "mlceval/splitter.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mlceval/synth.hpp"

using namespace mlceval;

namespace {

const LabelSchema& schema() { return LabelSchema::suicidality(); }

Corpus paper_corpus() { return sample_corpus(paper_corpus_spec(), 21); }

std::map<std::string, LabelSet> truth_by_id(const Corpus& corpus) {
    std::map<std::string, LabelSet> out;
    for (const auto& inst : corpus.instances()) out[inst.id] = inst.truth;
    return out;
}

}  // namespace

TEST_CASE("splits partition the corpus with balanced folds") {
    const Corpus corpus = paper_corpus();
    const SplitPlan plan = make_splits(corpus, 5, 3, StratifyPolicy::label_set, 42);
    CHECK(plan.folds.size() == 3);
    for (const auto& repeat : plan.folds) {
        REQUIRE(repeat.size() == 5);
        std::set<std::string> seen;
        for (const auto& fold : repeat) {
            CHECK(fold.size() == 100);  // 500 / 5
            for (const auto& id : fold) CHECK(seen.insert(id).second);
        }
        CHECK(seen.size() == corpus.size());
    }
}

TEST_CASE("label-set stratification bounds") {
    const Corpus corpus = paper_corpus();
    const auto truths = truth_by_id(corpus);
    const PowerSetOrder order = enumerate_powerset(schema());
    const SplitPlan plan = make_splits(corpus, 5, 3, StratifyPolicy::label_set, 7);

    // per-set totals over the corpus
    std::map<std::size_t, std::int64_t> set_total;
    for (const auto& inst : corpus.instances())
        set_total[order.index_of(inst.truth)] += 1;

    for (const auto& repeat : plan.folds) {
        for (const auto& [k, total] : set_total) {
            std::vector<std::int64_t> per_fold(repeat.size(), 0);
            for (std::size_t f = 0; f < repeat.size(); ++f)
                for (const auto& id : repeat[f])
                    if (order.index_of(truths.at(id)) == k) per_fold[f] += 1;

            if (total >= 5) {
                // within one of the proportional share
                const double share = static_cast<double>(total) / 5.0;
                for (auto c : per_fold) {
                    CHECK(static_cast<double>(c) >= share - 1.0);
                    CHECK(static_cast<double>(c) <= share + 1.0);
                }
            } else {
                // rare sets: members land in distinct folds
                for (auto c : per_fold) CHECK(c <= 1);
            }
        }
    }
}

TEST_CASE("three members of a set land in three distinct folds") {
    std::vector<AnnotatedInstance> instances;
    for (int i = 0; i < 22; ++i)
        instances.push_back({"common" + std::to_string(i), "text",
                             parse_binary_code("0-0-0-0", schema())});
    for (int i = 0; i < 3; ++i)
        instances.push_back({"rare" + std::to_string(i), "text",
                             parse_binary_code("1-0-1-0", schema())});
    const Corpus corpus(schema(), std::move(instances));
    const SplitPlan plan = make_splits(corpus, 5, 4, StratifyPolicy::label_set, 3);
    for (const auto& repeat : plan.folds) {
        std::set<std::size_t> folds_with_rare;
        for (std::size_t f = 0; f < repeat.size(); ++f)
            for (const auto& id : repeat[f])
                if (id.rfind("rare", 0) == 0) folds_with_rare.insert(f);
        CHECK(folds_with_rare.size() == 3);
    }
}

TEST_CASE("fold sizes differ by at most one when k does not divide n") {
    std::vector<AnnotatedInstance> instances;
    std::mt19937 rng(13);
    for (int i = 0; i < 503; ++i)
        instances.push_back({"u" + std::to_string(i), std::nullopt,
                             LabelSet(4, rng() % 16)});
    const Corpus corpus(schema(), std::move(instances));
    for (auto policy : {StratifyPolicy::none, StratifyPolicy::label_set}) {
        const SplitPlan plan = make_splits(corpus, 5, 2, policy, 8);
        for (const auto& repeat : plan.folds) {
            std::size_t lo = 503, hi = 0, total = 0;
            for (const auto& fold : repeat) {
                lo = std::min(lo, fold.size());
                hi = std::max(hi, fold.size());
                total += fold.size();
            }
            CHECK(total == 503);
            CHECK(hi - lo <= 1);
        }
    }
}

TEST_CASE("uniform corpus splits evenly") {
    std::vector<AnnotatedInstance> instances;
    for (int i = 0; i < 10; ++i)
        instances.push_back({"n" + std::to_string(i), std::nullopt,
                             parse_binary_code("0-1-0-0", schema())});
    const Corpus corpus(schema(), std::move(instances));
    const SplitPlan plan = make_splits(corpus, 5, 1, StratifyPolicy::label_set, 1);
    for (const auto& fold : plan.folds[0]) CHECK(fold.size() == 2);
}

TEST_CASE("group-pattern stratification uses the group preset") {
    const Corpus corpus = paper_corpus();
    const auto groups = si_sa_groups(schema());
    const SplitPlan plan =
        make_splits(corpus, 5, 1, StratifyPolicy::group_pattern, 11, &groups);
    const auto truths = truth_by_id(corpus);
    // group totals 117 / 89 / 118 / 176 over the preset; per-fold within one of share
    for (std::size_t g = 0; g < groups.size(); ++g) {
        std::int64_t total = 0;
        for (const auto& [id, t] : truths) total += groups[g].pattern.matches(t) ? 1 : 0;
        const double share = static_cast<double>(total) / 5.0;
        for (const auto& fold : plan.folds[0]) {
            std::int64_t c = 0;
            for (const auto& id : fold) c += groups[g].pattern.matches(truths.at(id)) ? 1 : 0;
            CHECK(static_cast<double>(c) >= share - 1.0);
            CHECK(static_cast<double>(c) <= share + 1.0);
        }
    }
    CHECK_THROWS_AS(make_splits(corpus, 5, 1, StratifyPolicy::group_pattern, 11, nullptr),
                    ValidationError);
}

TEST_CASE("plans are deterministic and serialize stably") {
    const Corpus corpus = paper_corpus();
    const SplitPlan a = make_splits(corpus, 5, 3, StratifyPolicy::label_set, 42);
    const SplitPlan b = make_splits(corpus, 5, 3, StratifyPolicy::label_set, 42);
    CHECK(a.to_json().dump(2) == b.to_json().dump(2));
    const SplitPlan c = make_splits(corpus, 5, 3, StratifyPolicy::label_set, 43);
    CHECK(a.to_json().dump(2) != c.to_json().dump(2));
    // repeats differ from each other
    CHECK(a.folds[0] != a.folds[1]);

    const SplitPlan back = SplitPlan::from_json(a.to_json());
    CHECK(back.folds == a.folds);
    CHECK(back.k == a.k);
    CHECK(back.policy == a.policy);
}

TEST_CASE("split preconditions") {
    const Corpus corpus = paper_corpus();
    CHECK_THROWS_AS(make_splits(corpus, 1, 1, StratifyPolicy::none, 0), ValidationError);
    CHECK_THROWS_AS(make_splits(corpus, 501, 1, StratifyPolicy::none, 0), ValidationError);
    CHECK_THROWS_AS(make_splits(corpus, 5, 0, StratifyPolicy::none, 0), ValidationError);
}

TEST_CASE("fine-tune export") {
    const Corpus corpus = paper_corpus();
    const SplitPlan plan = make_splits(corpus, 5, 1, StratifyPolicy::label_set, 42);
    std::ostringstream out;
    const std::size_t n = export_finetune(corpus, plan, 0, 0, PromptTemplate::zero_default(), out);
    CHECK(n == 400);

    // one JSON record per line; assistant content is the truth's binary code
    std::istringstream lines(out.str());
    std::string line;
    std::size_t count = 0;
    const auto truths = truth_by_id(corpus);
    std::set<std::string> held(plan.folds[0][0].begin(), plan.folds[0][0].end());
    while (std::getline(lines, line)) {
        const auto doc = nlohmann::ordered_json::parse(line);
        const auto& messages = doc.at("messages");
        REQUIRE(messages.size() == 3);
        CHECK(messages[0].at("role") == "system");
        CHECK(messages[1].at("role") == "user");
        CHECK(messages[2].at("role") == "assistant");
        const std::string code = messages[2].at("content").get<std::string>();
        CHECK(code.size() == 7);
        ++count;
    }
    CHECK(count == 400);

    SUBCASE("held-out instances are excluded") {
        // the user message embeds the note text, which carries the id
        std::istringstream again(out.str());
        while (std::getline(again, line)) {
            const auto doc = nlohmann::ordered_json::parse(line);
            const std::string user = doc.at("messages")[1].at("content").get<std::string>();
            for (const auto& id : held) CHECK(user.find(id) == std::string::npos);
        }
    }
    SUBCASE("assistant code matches the instance truth") {
        std::istringstream again(out.str());
        std::size_t i = 0;
        for (const auto& inst : corpus.instances()) {
            if (held.count(inst.id)) continue;
            std::getline(again, line);
            const auto doc = nlohmann::ordered_json::parse(line);
            CHECK(doc.at("messages")[2].at("content").get<std::string>() ==
                  format_binary_code(inst.truth, schema()));
            ++i;
        }
    }
    SUBCASE("missing text is an error naming the id") {
        Corpus no_text(schema(), {{"bare", std::nullopt, LabelSet(4)},
                                  {"b2", std::nullopt, LabelSet(4)}});
        const SplitPlan p2 = make_splits(no_text, 2, 1, StratifyPolicy::none, 0);
        std::ostringstream sink;
        CHECK_THROWS_WITH_AS(
            export_finetune(no_text, p2, 0, 0, PromptTemplate::zero_default(), sink),
            doctest::Contains("b"), ValidationError);
    }
    SUBCASE("bad indices") {
        std::ostringstream sink;
        CHECK_THROWS_AS(
            export_finetune(corpus, plan, 1, 0, PromptTemplate::zero_default(), sink),
            ValidationError);
        CHECK_THROWS_AS(
            export_finetune(corpus, plan, 0, 5, PromptTemplate::zero_default(), sink),
            ValidationError);
    }
}
