#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlceval/dataset.hpp"
#include "mlceval/prompt.hpp"

namespace mlceval {

enum class StratifyPolicy { none, label_set, group_pattern };

std::string to_string(StratifyPolicy p);
StratifyPolicy stratify_policy_from_string(std::string_view text);

// Seeded k-fold plan. Within each repeat the folds partition the corpus ids,
// fold sizes differ by at most one, and under a stratified policy each
// stratum's members are dealt to consecutive folds so per-fold counts differ
// from the proportional share by at most one and rare strata land in
// distinct folds.
struct SplitPlan {
    int k = 0;
    int repeats = 0;
    std::uint64_t seed = 0;
    StratifyPolicy policy = StratifyPolicy::label_set;
    std::string rng;
    // folds[repeat][fold] -> instance ids
    std::vector<std::vector<std::vector<std::string>>> folds;

    nlohmann::ordered_json to_json() const;
    static SplitPlan from_json(const nlohmann::ordered_json& doc);
};

SplitPlan make_splits(const Corpus& corpus, int k, int repeats, StratifyPolicy policy,
                      std::uint64_t seed,
                      const std::vector<LabelGroup>* groups = nullptr);

// Writes one chat-format training record per instance outside the held-out
// fold: system/user messages rendered from the template, assistant message
// carrying the truth's binary code. Returns the number of records written.
std::size_t export_finetune(const Corpus& corpus, const SplitPlan& plan, int repeat, int fold,
                            const PromptTemplate& tmpl, std::ostream& out);

}  // namespace mlceval
