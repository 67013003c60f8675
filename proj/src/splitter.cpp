#include "mlceval/splitter.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_set>

#include "mlceval/rng.hpp"

namespace mlceval {

using ojson = nlohmann::ordered_json;

std::string to_string(StratifyPolicy p) {
    switch (p) {
        case StratifyPolicy::none: return "none";
        case StratifyPolicy::label_set: return "label-set";
        case StratifyPolicy::group_pattern: return "group-pattern";
    }
    return "label-set";
}

StratifyPolicy stratify_policy_from_string(std::string_view text) {
    if (text == "none") return StratifyPolicy::none;
    if (text == "label-set") return StratifyPolicy::label_set;
    if (text == "group-pattern") return StratifyPolicy::group_pattern;
    throw ValidationError("unknown stratification policy \"" + std::string(text) +
                          "\" (expected none, label-set or group-pattern)");
}

SplitPlan make_splits(const Corpus& corpus, int k, int repeats, StratifyPolicy policy,
                      std::uint64_t seed, const std::vector<LabelGroup>* groups) {
    if (k < 2) throw ValidationError("fold count must be at least 2");
    if (static_cast<std::size_t>(k) > corpus.size())
        throw ValidationError("fold count " + std::to_string(k) + " exceeds corpus size " +
                              std::to_string(corpus.size()));
    if (repeats < 1) throw ValidationError("repeat count must be at least 1");
    if (policy == StratifyPolicy::group_pattern && (!groups || groups->empty()))
        throw ValidationError("group-pattern stratification requires group patterns");

    // Stratum index per instance. none -> one stratum; label-set -> canonical
    // power-set index; group-pattern -> index of the unique matching group.
    const std::size_t n = corpus.size();
    std::vector<std::size_t> stratum(n, 0);
    std::size_t stratum_count = 1;
    if (policy == StratifyPolicy::label_set) {
        const PowerSetOrder order = enumerate_powerset(corpus.schema());
        stratum_count = order.size();
        for (std::size_t i = 0; i < n; ++i)
            stratum[i] = order.index_of(corpus.instances()[i].truth);
    } else if (policy == StratifyPolicy::group_pattern) {
        stratum_count = groups->size();
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t matched = groups->size();
            for (std::size_t g = 0; g < groups->size(); ++g) {
                if ((*groups)[g].pattern.matches(corpus.instances()[i].truth)) {
                    if (matched != groups->size())
                        throw ValidationError("instance \"" + corpus.instances()[i].id +
                                              "\" matches more than one group pattern");
                    matched = g;
                }
            }
            if (matched == groups->size())
                throw ValidationError("instance \"" + corpus.instances()[i].id +
                                      "\" matches no group pattern");
            stratum[i] = matched;
        }
    }

    SplitPlan plan;
    plan.k = k;
    plan.repeats = repeats;
    plan.seed = seed;
    plan.policy = policy;
    plan.rng = DeterministicRng::kId;
    plan.folds.resize(static_cast<std::size_t>(repeats));

    for (int r = 0; r < repeats; ++r) {
        DeterministicRng rng(derive_seed(seed, 0x73706c69, static_cast<std::uint64_t>(r)));

        std::vector<std::vector<std::size_t>> members(stratum_count);
        for (std::size_t i = 0; i < n; ++i) members[stratum[i]].push_back(i);
        for (auto& group : members) rng.shuffle(group);

        // Deal all strata with one continuing cursor: fold sizes stay within
        // one of each other globally and per stratum.
        auto& fold_ids = plan.folds[static_cast<std::size_t>(r)];
        fold_ids.assign(static_cast<std::size_t>(k), {});
        std::size_t cursor = static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(k)));
        for (const auto& group : members) {
            for (std::size_t idx : group) {
                fold_ids[cursor % static_cast<std::size_t>(k)].push_back(
                    corpus.instances()[idx].id);
                ++cursor;
            }
        }
    }
    return plan;
}

ojson SplitPlan::to_json() const {
    ojson doc;
    doc["type"] = "split-plan";
    doc["k"] = k;
    doc["repeats"] = repeats;
    doc["seed"] = seed;
    doc["policy"] = to_string(policy);
    doc["rng"] = rng;
    ojson reps = ojson::array();
    for (const auto& rep : folds) {
        ojson fs = ojson::array();
        for (const auto& fold : rep) fs.push_back(fold);
        reps.push_back(std::move(fs));
    }
    doc["folds"] = std::move(reps);
    return doc;
}

SplitPlan SplitPlan::from_json(const ojson& doc) {
    SplitPlan plan;
    plan.k = doc.value("k", 0);
    plan.repeats = doc.value("repeats", 0);
    plan.seed = doc.value("seed", std::uint64_t{0});
    plan.policy = stratify_policy_from_string(doc.value("policy", "label-set"));
    plan.rng = doc.value("rng", "");
    for (const auto& rep : doc.at("folds")) {
        std::vector<std::vector<std::string>> fs;
        for (const auto& fold : rep) fs.push_back(fold.get<std::vector<std::string>>());
        plan.folds.push_back(std::move(fs));
    }
    return plan;
}

std::size_t export_finetune(const Corpus& corpus, const SplitPlan& plan, int repeat, int fold,
                            const PromptTemplate& tmpl, std::ostream& out) {
    if (repeat < 0 || static_cast<std::size_t>(repeat) >= plan.folds.size())
        throw ValidationError("repeat index " + std::to_string(repeat) + " out of range");
    if (fold < 0 || fold >= plan.k)
        throw ValidationError("fold index " + std::to_string(fold) + " out of range");

    const auto& held_out =
        plan.folds[static_cast<std::size_t>(repeat)][static_cast<std::size_t>(fold)];
    std::unordered_set<std::string> held(held_out.begin(), held_out.end());

    std::size_t written = 0;
    for (const auto& inst : corpus.instances()) {
        if (held.count(inst.id)) continue;
        if (!inst.text || inst.text->empty())
            throw ValidationError("fine-tune export requires instance text; missing for \"" +
                                  inst.id + "\"");
        const auto messages = render_prompt(tmpl, corpus.schema(), *inst.text);
        ojson rec;
        ojson arr = ojson::array();
        for (const auto& msg : messages)
            arr.push_back(ojson{{"role", msg.role}, {"content", msg.content}});
        arr.push_back(ojson{{"role", "assistant"},
                            {"content", format_binary_code(inst.truth, corpus.schema())}});
        rec["messages"] = std::move(arr);
        out << rec.dump() << '\n';
        ++written;
    }
    return written;
}

}  // namespace mlceval
