#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlceval/dataset.hpp"
#include "mlceval/labelspace.hpp"

namespace mlceval {

// Target label-set distribution for corpus generation. Either exact per-set
// counts (counts sum to n) or per-set probabilities (sum to 1 within 1e-9);
// entries are indexed by canonical power-set position.
struct DistributionSpec {
    enum class Mode { counts, probabilities };

    explicit DistributionSpec(LabelSchema s) : schema(std::move(s)) {}

    LabelSchema schema;
    std::int64_t n = 0;
    Mode mode = Mode::counts;
    std::vector<std::int64_t> counts;  // canonical order, size M (counts mode)
    std::vector<double> probabilities;  // canonical order, size M (probability mode)

    void validate() const;
    nlohmann::ordered_json to_json() const;
    static DistributionSpec from_json(const nlohmann::ordered_json& doc);
};

// Error generator applied to a corpus to fabricate prediction runs.
// per_label mode flips each label independently: a present label is dropped
// with its omission rate, an absent one added with its hallucination rate.
// per_set_transition mode draws the predicted set from a row-stochastic M×M
// matrix indexed by the true set.
struct PerLabelRates {
    double hallucination = 0.0;  // absent -> present
    double omission = 0.0;       // present -> absent
};

struct NoiseKernel {
    enum class Mode { per_label, per_set_transition };

    Mode mode = Mode::per_label;
    std::vector<PerLabelRates> per_label;   // size L
    std::vector<double> transition;         // row-major M×M, rows sum to 1

    void validate(const LabelSchema& schema) const;
    nlohmann::ordered_json to_json(const LabelSchema& schema) const;
    static NoiseKernel from_json(const nlohmann::ordered_json& doc, const LabelSchema& schema);
};

// Constraint set for deterministic truth/prediction fixtures: explicit
// (true set, predicted set, count) cells plus per-row truth totals; each
// row's unconstrained remainder is filled on the diagonal.
struct FixtureCell {
    LabelSet truth;
    LabelSet predicted;
    std::int64_t count = 0;
};

struct FixtureSpec {
    explicit FixtureSpec(LabelSchema s) : schema(std::move(s)) {}

    LabelSchema schema;
    std::int64_t n = 0;
    std::vector<std::int64_t> row_totals;  // canonical order, size M
    std::vector<FixtureCell> cells;

    void validate() const;
    nlohmann::ordered_json to_json() const;
    static FixtureSpec from_json(const nlohmann::ordered_json& doc);
};

Corpus sample_corpus(const DistributionSpec& spec, std::uint64_t seed);

std::vector<PredictionRecord> perturb(const Corpus& corpus, const NoiseKernel& kernel,
                                      std::uint64_t seed);

AlignedPairs build_fixture(const FixtureSpec& spec);

// Corpus and prediction views of a fixture, for writing to files.
Corpus fixture_corpus(const FixtureSpec& spec);
std::vector<PredictionRecord> fixture_predictions(const FixtureSpec& spec);

// Shipped presets ---------------------------------------------------------------
//
// "paper-corpus": a 500-instance suicidality corpus profile over the default
// schema: 675 single labels split 294/265/22/94 across SI/SA/ES/NSSI, 14
// observed label sets (0-1-1-1 and 1-0-1-1 absent), 62 instances of 0-1-0-0,
// 11 of 0-0-0-1, and a 451/45/4 cardinality histogram for <=2/3/4 labels.
// Only those totals are pinned by the profile; the remaining per-set counts
// are a documented fill chosen to satisfy them.
//
// "figure4-fixture": a truth/prediction fixture over the same truth
// distribution with a known error structure: 383 exact matches, 86
// upper-triangle errors of which 80 are hallucinations, 31 lower-triangle
// errors of which 28 are omissions, and the headline transition
// 0-1-0-0 -> 1-1-0-0 occurring 30 times.

DistributionSpec paper_corpus_spec();
FixtureSpec figure4_fixture_spec();

bool is_distribution_preset(std::string_view name);   // "paper-corpus"
bool is_fixture_preset(std::string_view name);        // "figure4-fixture"

}  // namespace mlceval
