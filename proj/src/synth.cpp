#include "mlceval/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "mlceval/rng.hpp"

namespace mlceval {

using ojson = nlohmann::ordered_json;

// DistributionSpec ----------------------------------------------------------------

void DistributionSpec::validate() const {
    const std::size_t m = std::size_t{1} << schema.size();
    if (n < 1) throw ValidationError("distribution spec requires n >= 1");
    if (mode == Mode::counts) {
        if (counts.size() != m)
            throw ValidationError("distribution spec counts must cover all " +
                                  std::to_string(m) + " label sets");
        std::int64_t total = 0;
        for (std::int64_t c : counts) {
            if (c < 0) throw ValidationError("distribution spec counts must be non-negative");
            total += c;
        }
        if (total != n)
            throw ValidationError("distribution spec counts sum to " + std::to_string(total) +
                                  ", expected n = " + std::to_string(n));
    } else {
        if (probabilities.size() != m)
            throw ValidationError("distribution spec probabilities must cover all " +
                                  std::to_string(m) + " label sets");
        double total = 0.0;
        for (double p : probabilities) {
            if (p < 0.0 || p > 1.0)
                throw ValidationError("distribution spec probabilities must lie in [0,1]");
            total += p;
        }
        if (std::fabs(total - 1.0) > 1e-9)
            throw ValidationError("distribution spec probabilities sum to " +
                                  std::to_string(total) + ", expected 1");
    }
}

ojson DistributionSpec::to_json() const {
    validate();
    const PowerSetOrder order(schema.size());
    ojson doc;
    doc["type"] = "distribution-spec";
    doc["schema"] = schema.labels();
    doc["n"] = n;
    doc["mode"] = mode == Mode::counts ? "counts" : "probabilities";
    ojson per_set;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::string code = format_binary_code(order.at(k), schema);
        if (mode == Mode::counts) {
            if (counts[k] != 0) per_set[code] = counts[k];
        } else {
            if (probabilities[k] != 0.0) per_set[code] = probabilities[k];
        }
    }
    doc[mode == Mode::counts ? "counts" : "probabilities"] = std::move(per_set);
    return doc;
}

DistributionSpec DistributionSpec::from_json(const ojson& doc) {
    if (!doc.contains("schema"))
        throw ParseError("distribution spec missing \"schema\"");
    DistributionSpec spec{LabelSchema(doc["schema"].get<std::vector<std::string>>())};
    spec.n = doc.value("n", std::int64_t{0});
    const std::string mode = doc.value("mode", "counts");
    const PowerSetOrder order(spec.schema.size());
    if (mode == "counts") {
        spec.mode = Mode::counts;
        spec.counts.assign(order.size(), 0);
        if (!doc.contains("counts")) throw ParseError("distribution spec missing \"counts\"");
        for (const auto& [code, v] : doc["counts"].items())
            spec.counts[order.index_of(parse_binary_code(code, spec.schema))] =
                v.get<std::int64_t>();
    } else if (mode == "probabilities") {
        spec.mode = Mode::probabilities;
        spec.probabilities.assign(order.size(), 0.0);
        if (!doc.contains("probabilities"))
            throw ParseError("distribution spec missing \"probabilities\"");
        for (const auto& [code, v] : doc["probabilities"].items())
            spec.probabilities[order.index_of(parse_binary_code(code, spec.schema))] =
                v.get<double>();
    } else {
        throw ParseError("distribution spec mode must be \"counts\" or \"probabilities\"");
    }
    spec.validate();
    return spec;
}

// NoiseKernel ---------------------------------------------------------------------

void NoiseKernel::validate(const LabelSchema& schema) const {
    if (mode == Mode::per_label) {
        if (per_label.size() != schema.size())
            throw ValidationError("noise kernel must provide rates for all " +
                                  std::to_string(schema.size()) + " labels");
        for (const auto& r : per_label) {
            if (r.hallucination < 0.0 || r.hallucination > 1.0 || r.omission < 0.0 ||
                r.omission > 1.0)
                throw ValidationError("noise kernel rates must lie in [0,1]");
        }
    } else {
        const std::size_t m = std::size_t{1} << schema.size();
        if (transition.size() != m * m)
            throw ValidationError("transition kernel must be " + std::to_string(m) + "x" +
                                  std::to_string(m));
        for (std::size_t r = 0; r < m; ++r) {
            double row = 0.0;
            for (std::size_t c = 0; c < m; ++c) {
                const double p = transition[r * m + c];
                if (p < 0.0 || p > 1.0)
                    throw ValidationError("transition probabilities must lie in [0,1]");
                row += p;
            }
            if (std::fabs(row - 1.0) > 1e-9)
                throw ValidationError("transition row " + std::to_string(r) + " sums to " +
                                      std::to_string(row) + ", expected 1");
        }
    }
}

ojson NoiseKernel::to_json(const LabelSchema& schema) const {
    validate(schema);
    ojson doc;
    doc["type"] = "noise-kernel";
    if (mode == Mode::per_label) {
        doc["mode"] = "per-label";
        ojson rates;
        for (std::size_t i = 0; i < schema.size(); ++i)
            rates[schema.label(i)] = ojson{{"hallucination", per_label[i].hallucination},
                                           {"omission", per_label[i].omission}};
        doc["rates"] = std::move(rates);
    } else {
        doc["mode"] = "per-set-transition";
        const PowerSetOrder order(schema.size());
        ojson rows = ojson::array();
        for (std::size_t r = 0; r < order.size(); ++r) {
            ojson row = ojson::array();
            for (std::size_t c = 0; c < order.size(); ++c)
                row.push_back(transition[r * order.size() + c]);
            rows.push_back(std::move(row));
        }
        doc["matrix"] = std::move(rows);
        doc["order"] = "canonical";
    }
    return doc;
}

NoiseKernel NoiseKernel::from_json(const ojson& doc, const LabelSchema& schema) {
    NoiseKernel kernel;
    const std::string mode = doc.value("mode", "per-label");
    if (mode == "per-label") {
        kernel.mode = Mode::per_label;
        kernel.per_label.assign(schema.size(), PerLabelRates{});
        if (!doc.contains("rates")) throw ParseError("noise kernel missing \"rates\"");
        for (const auto& [name, v] : doc["rates"].items()) {
            const std::size_t pos = schema.index_of(name);
            kernel.per_label[pos].hallucination = v.value("hallucination", 0.0);
            kernel.per_label[pos].omission = v.value("omission", 0.0);
        }
    } else if (mode == "per-set-transition") {
        kernel.mode = Mode::per_set_transition;
        if (!doc.contains("matrix")) throw ParseError("noise kernel missing \"matrix\"");
        const std::size_t m = std::size_t{1} << schema.size();
        kernel.transition.reserve(m * m);
        for (const auto& row : doc["matrix"])
            for (const auto& v : row) kernel.transition.push_back(v.get<double>());
    } else {
        throw ParseError("noise kernel mode must be \"per-label\" or \"per-set-transition\"");
    }
    kernel.validate(schema);
    return kernel;
}

// FixtureSpec ---------------------------------------------------------------------

void FixtureSpec::validate() const {
    const PowerSetOrder order(schema.size());
    if (n < 1) throw ValidationError("fixture spec requires n >= 1");
    if (row_totals.size() != order.size())
        throw ValidationError("fixture spec row totals must cover all " +
                              std::to_string(order.size()) + " label sets");
    std::int64_t total = 0;
    for (std::int64_t c : row_totals) {
        if (c < 0) throw ValidationError("fixture row totals must be non-negative");
        total += c;
    }
    if (total != n)
        throw ValidationError("fixture row totals sum to " + std::to_string(total) +
                              ", expected n = " + std::to_string(n));
    std::vector<std::int64_t> row_used(order.size(), 0);
    for (const auto& cell : cells) {
        if (cell.count < 0) throw ValidationError("fixture cell counts must be non-negative");
        row_used[order.index_of(cell.truth)] += cell.count;
    }
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (row_used[k] > row_totals[k])
            throw ValidationError("fixture cells for true set " +
                                  format_binary_code(order.at(k), schema) + " use " +
                                  std::to_string(row_used[k]) + " of " +
                                  std::to_string(row_totals[k]) + " instances");
    }
}

ojson FixtureSpec::to_json() const {
    validate();
    const PowerSetOrder order(schema.size());
    ojson doc;
    doc["type"] = "fixture-spec";
    doc["schema"] = schema.labels();
    doc["n"] = n;
    ojson totals;
    for (std::size_t k = 0; k < order.size(); ++k)
        if (row_totals[k] != 0)
            totals[format_binary_code(order.at(k), schema)] = row_totals[k];
    doc["row_totals"] = std::move(totals);
    ojson arr = ojson::array();
    for (const auto& cell : cells)
        arr.push_back(ojson{{"true", format_binary_code(cell.truth, schema)},
                            {"predicted", format_binary_code(cell.predicted, schema)},
                            {"count", cell.count}});
    doc["cells"] = std::move(arr);
    doc["fill"] = "diagonal";
    return doc;
}

FixtureSpec FixtureSpec::from_json(const ojson& doc) {
    if (!doc.contains("schema")) throw ParseError("fixture spec missing \"schema\"");
    FixtureSpec spec{LabelSchema(doc["schema"].get<std::vector<std::string>>())};
    spec.n = doc.value("n", std::int64_t{0});
    const PowerSetOrder order(spec.schema.size());
    spec.row_totals.assign(order.size(), 0);
    if (!doc.contains("row_totals")) throw ParseError("fixture spec missing \"row_totals\"");
    for (const auto& [code, v] : doc["row_totals"].items())
        spec.row_totals[order.index_of(parse_binary_code(code, spec.schema))] =
            v.get<std::int64_t>();
    for (const auto& cell : doc.value("cells", ojson::array()))
        spec.cells.push_back(
            FixtureCell{parse_binary_code(cell.at("true").get<std::string>(), spec.schema),
                        parse_binary_code(cell.at("predicted").get<std::string>(), spec.schema),
                        cell.at("count").get<std::int64_t>()});
    spec.validate();
    return spec;
}

// Generation ----------------------------------------------------------------------

namespace {

std::string synthetic_id(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-%06zu", prefix, i + 1);
    return buf;
}

std::string placeholder_text(const std::string& id) {
    return "[synthetic note " + id + "]";
}

}  // namespace

Corpus sample_corpus(const DistributionSpec& spec, std::uint64_t seed) {
    spec.validate();
    const PowerSetOrder order(spec.schema.size());
    DeterministicRng rng(derive_seed(seed, 0x636f7270));  // corpus stream

    std::vector<LabelSet> truths;
    truths.reserve(static_cast<std::size_t>(spec.n));
    if (spec.mode == DistributionSpec::Mode::counts) {
        for (std::size_t k = 0; k < order.size(); ++k)
            for (std::int64_t i = 0; i < spec.counts[k]; ++i) truths.push_back(order.at(k));
    } else {
        std::vector<double> cumulative(order.size(), 0.0);
        double acc = 0.0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            acc += spec.probabilities[k];
            cumulative[k] = acc;
        }
        for (std::int64_t i = 0; i < spec.n; ++i) {
            const double u = rng.next_unit() * acc;
            const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
            const std::size_t k = std::min<std::size_t>(
                static_cast<std::size_t>(it - cumulative.begin()), order.size() - 1);
            truths.push_back(order.at(k));
        }
    }
    rng.shuffle(truths);

    std::vector<AnnotatedInstance> instances;
    instances.reserve(truths.size());
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const std::string id = synthetic_id("synth", i);
        instances.push_back(AnnotatedInstance{id, placeholder_text(id), truths[i]});
    }
    return Corpus(spec.schema, std::move(instances));
}

std::vector<PredictionRecord> perturb(const Corpus& corpus, const NoiseKernel& kernel,
                                      std::uint64_t seed) {
    kernel.validate(corpus.schema());
    const std::size_t l = corpus.schema().size();
    DeterministicRng rng(derive_seed(seed, 0x70657274));  // perturbation stream

    std::vector<PredictionRecord> out;
    out.reserve(corpus.size());
    if (kernel.mode == NoiseKernel::Mode::per_label) {
        for (const auto& inst : corpus.instances()) {
            LabelSet predicted = inst.truth;
            for (std::size_t j = 0; j < l; ++j) {
                if (inst.truth.contains(j)) {
                    if (rng.bernoulli(kernel.per_label[j].omission))
                        predicted = predicted.with(j, false);
                } else {
                    if (rng.bernoulli(kernel.per_label[j].hallucination))
                        predicted = predicted.with(j, true);
                }
            }
            out.push_back(PredictionRecord{inst.id, predicted, std::nullopt});
        }
    } else {
        const PowerSetOrder order(l);
        const std::size_t m = order.size();
        for (const auto& inst : corpus.instances()) {
            const std::size_t row = order.index_of(inst.truth);
            const double u = rng.next_unit();
            double acc = 0.0;
            std::size_t chosen = m - 1;
            for (std::size_t c = 0; c < m; ++c) {
                acc += kernel.transition[row * m + c];
                if (u < acc) {
                    chosen = c;
                    break;
                }
            }
            out.push_back(PredictionRecord{inst.id, order.at(chosen), std::nullopt});
        }
    }
    return out;
}

namespace {

// Expands a fixture spec row by row: constrained cells first (in spec order),
// then the diagonal remainder. Throws if any remainder would be negative.
std::vector<std::pair<LabelSet, LabelSet>> fixture_rows(const FixtureSpec& spec) {
    spec.validate();
    const PowerSetOrder order(spec.schema.size());
    std::vector<std::vector<const FixtureCell*>> by_row(order.size());
    std::vector<std::int64_t> row_used(order.size(), 0);
    for (const auto& cell : spec.cells) {
        const std::size_t r = order.index_of(cell.truth);
        by_row[r].push_back(&cell);
        row_used[r] += cell.count;
    }
    std::vector<std::pair<LabelSet, LabelSet>> rows;
    rows.reserve(static_cast<std::size_t>(spec.n));
    for (std::size_t r = 0; r < order.size(); ++r) {
        for (const FixtureCell* cell : by_row[r])
            for (std::int64_t i = 0; i < cell->count; ++i)
                rows.emplace_back(cell->truth, cell->predicted);
        const std::int64_t remainder = spec.row_totals[r] - row_used[r];
        for (std::int64_t i = 0; i < remainder; ++i)
            rows.emplace_back(order.at(r), order.at(r));
    }
    return rows;
}

}  // namespace

AlignedPairs build_fixture(const FixtureSpec& spec) {
    const auto rows = fixture_rows(spec);
    std::vector<AlignedPair> pairs;
    pairs.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        pairs.push_back(AlignedPair{synthetic_id("fx", i), rows[i].first, rows[i].second});
    return AlignedPairs(spec.schema, std::move(pairs));
}

Corpus fixture_corpus(const FixtureSpec& spec) {
    const auto rows = fixture_rows(spec);
    std::vector<AnnotatedInstance> instances;
    instances.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string id = synthetic_id("fx", i);
        instances.push_back(AnnotatedInstance{id, placeholder_text(id), rows[i].first});
    }
    return Corpus(spec.schema, std::move(instances));
}

std::vector<PredictionRecord> fixture_predictions(const FixtureSpec& spec) {
    const auto rows = fixture_rows(spec);
    std::vector<PredictionRecord> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.push_back(PredictionRecord{synthetic_id("fx", i), rows[i].second, std::nullopt});
    return out;
}

// Presets -------------------------------------------------------------------------

namespace {

struct CodeCount {
    const char* code;
    std::int64_t count;
};

// Truth distribution satisfying the pinned totals (see synth.hpp). The counts
// for sets not fixed by a stated total are a fill chosen to respect the label
// marginals, the cardinality histogram and the observed-set list; the fill
// values are: 0-0-0-0:98, 0-0-1-0:6, 0-0-1-1:2, 0-1-0-1:25, 0-1-1-0:2,
// 1-0-0-0:103, 1-0-0-1:12, 1-0-1-0:3, 1-1-0-0:127, 1-1-0-1:40, 1-1-1-0:5.
constexpr CodeCount kPaperCorpusCounts[] = {
    {"0-0-0-0", 98}, {"0-0-0-1", 11}, {"0-0-1-0", 6},   {"0-0-1-1", 2},
    {"0-1-0-0", 62}, {"0-1-0-1", 25}, {"0-1-1-0", 2},   {"0-1-1-1", 0},
    {"1-0-0-0", 103}, {"1-0-0-1", 12}, {"1-0-1-0", 3},  {"1-0-1-1", 0},
    {"1-1-0-0", 127}, {"1-1-0-1", 40}, {"1-1-1-0", 5},  {"1-1-1-1", 4},
};

struct CellSpec {
    const char* truth;
    const char* predicted;
    std::int64_t count;
};

// Off-diagonal error cells. Together with the diagonal fill over the
// paper-corpus truth distribution they reproduce the pinned error structure:
// 117 errors = 80 hallucinations + 28 omissions + 9 hybrid, split 86 above /
// 31 below the diagonal, 48/3 hallucination/omission flips of SI with 38 of
// the 48 inside 0-1-0-* -> 1-1-0-*, and 7 of the 11 true 0-0-0-1 wrong with
// 5 of the 7 predictions containing SA.
constexpr CellSpec kFigure4Cells[] = {
    {"0-0-0-0", "1-0-0-0", 4}, {"0-0-0-0", "0-0-0-1", 5}, {"0-0-0-0", "0-1-0-0", 3},
    {"0-0-0-1", "1-1-0-0", 1}, {"0-0-0-1", "1-0-0-1", 1}, {"0-0-0-1", "0-1-0-0", 2},
    {"0-0-0-1", "0-1-0-1", 2}, {"0-0-0-1", "0-0-0-0", 1},
    {"0-0-1-0", "1-0-1-0", 1},
    {"0-0-1-1", "0-0-0-1", 1},
    {"0-1-0-0", "1-1-0-0", 30}, {"0-1-0-0", "1-1-0-1", 1}, {"0-1-0-0", "1-0-0-0", 2},
    {"0-1-0-1", "1-1-0-1", 7}, {"0-1-0-1", "0-1-0-0", 4},
    {"0-1-1-0", "1-1-1-0", 1},
    {"1-0-0-0", "0-0-0-0", 2}, {"1-0-0-0", "1-1-0-0", 12},
    {"1-0-0-1", "1-1-0-1", 2},
    {"1-0-1-0", "1-1-0-0", 1}, {"1-0-1-0", "1-0-0-1", 1},
    {"1-1-0-0", "0-1-0-0", 1}, {"1-1-0-0", "1-1-0-1", 8}, {"1-1-0-0", "1-1-1-0", 3},
    {"1-1-0-0", "1-0-0-0", 10},
    {"1-1-0-1", "1-1-0-0", 6}, {"1-1-0-1", "1-0-1-0", 1},
    {"1-1-1-0", "1-1-0-0", 2}, {"1-1-1-0", "1-1-0-1", 1},
    {"1-1-1-1", "1-1-0-1", 1},
};

std::vector<std::int64_t> paper_corpus_counts(const LabelSchema& schema,
                                              const PowerSetOrder& order) {
    std::vector<std::int64_t> counts(order.size(), 0);
    for (const auto& cc : kPaperCorpusCounts)
        counts[order.index_of(parse_binary_code(cc.code, schema))] = cc.count;
    return counts;
}

}  // namespace

DistributionSpec paper_corpus_spec() {
    const LabelSchema& schema = LabelSchema::suicidality();
    const PowerSetOrder order(schema.size());
    DistributionSpec spec{schema};
    spec.n = 500;
    spec.mode = DistributionSpec::Mode::counts;
    spec.counts = paper_corpus_counts(schema, order);
    spec.validate();
    return spec;
}

FixtureSpec figure4_fixture_spec() {
    const LabelSchema& schema = LabelSchema::suicidality();
    const PowerSetOrder order(schema.size());
    FixtureSpec spec{schema};
    spec.n = 500;
    spec.row_totals = paper_corpus_counts(schema, order);
    for (const auto& cell : kFigure4Cells)
        spec.cells.push_back(FixtureCell{parse_binary_code(cell.truth, schema),
                                         parse_binary_code(cell.predicted, schema),
                                         cell.count});
    spec.validate();
    return spec;
}

bool is_distribution_preset(std::string_view name) { return name == "paper-corpus"; }
bool is_fixture_preset(std::string_view name) { return name == "figure4-fixture"; }

}  // namespace mlceval
