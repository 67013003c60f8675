#include "mlceval/metrics.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace mlceval {

using ojson = nlohmann::ordered_json;

double f1_score(double precision, double recall) {
    const double sum = precision + recall;
    if (sum == 0.0) return 0.0;
    return 2.0 * precision * recall / sum;
}

namespace {

double ratio(double num, std::int64_t denom) {
    return denom == 0 ? 0.0 : num / static_cast<double>(denom);
}

// Serialized metrics round to 6 decimals; exact values stay in memory.
double round6(double x) { return std::round(x * 1e6) / 1e6; }

}  // namespace

// Label level -----------------------------------------------------------------

BinaryCounts label_counts(const AlignedPairs& pairs, std::size_t label_pos) {
    if (label_pos >= pairs.schema().size())
        throw ValidationError("label position " + std::to_string(label_pos) +
                              " out of range");
    BinaryCounts c;
    for (const auto& p : pairs.pairs()) {
        const bool truth = p.truth.contains(label_pos);
        const bool pred = p.predicted.contains(label_pos);
        if (truth && pred) ++c.tp;
        else if (!truth && pred) ++c.fp;
        else if (truth && !pred) ++c.fn;
        else ++c.tn;
    }
    return c;
}

LabelMetrics label_prf(const AlignedPairs& pairs, std::string_view label) {
    if (pairs.size() == 0) throw ValidationError("label metrics require at least one pair");
    const std::size_t pos = pairs.schema().index_of(label);
    LabelMetrics m;
    m.counts = label_counts(pairs, pos);
    m.prf.precision = ratio(static_cast<double>(m.counts.tp), m.counts.tp + m.counts.fp);
    m.prf.recall = ratio(static_cast<double>(m.counts.tp), m.counts.tp + m.counts.fn);
    m.prf.f1 = f1_score(m.prf.precision, m.prf.recall);
    m.prf.support = m.counts.tp + m.counts.fn;
    m.accuracy = ratio(static_cast<double>(m.counts.tp + m.counts.tn),
                       static_cast<std::int64_t>(pairs.size()));
    return m;
}

// Instance level ----------------------------------------------------------------

InstanceScores instance_scores(const LabelSet& truth, const LabelSet& predicted) {
    if (truth.width() != predicted.width())
        throw ValidationError("instance score width mismatch: " +
                              std::to_string(truth.width()) + " vs " +
                              std::to_string(predicted.width()));
    InstanceScores s;
    const auto overlap = static_cast<double>(truth.intersect(predicted).cardinality());
    const auto spurious = static_cast<double>(predicted.minus(truth).cardinality());
    const auto missed = static_cast<double>(truth.minus(predicted).cardinality());
    const double denom = overlap + (spurious + missed) / 2.0;
    s.dice = denom == 0.0 ? 1.0 : overlap / denom;  // both sets empty -> perfect
    const auto l = static_cast<double>(truth.width());
    const double both_absent =
        static_cast<double>(truth.complement().intersect(predicted.complement()).cardinality());
    s.hamming = (overlap + both_absent) / l;
    return s;
}

// Label-set level ----------------------------------------------------------------

SetLevelCounts::SetLevelCounts(PowerSetOrder order, std::vector<SetCounts> per_set,
                               std::int64_t n)
    : order_(std::move(order)), per_set_(std::move(per_set)), n_(n) {
    if (per_set_.size() != order_.size())
        throw ValidationError("set-level counts size mismatch");
}

SetLevelCounts labelset_counts(const AlignedPairs& pairs, const PowerSetOrder& order) {
    if (pairs.size() == 0)
        throw ValidationError("label-set counts require at least one pair");
    std::vector<SetCounts> per_set(order.size());
    for (const auto& p : pairs.pairs()) {
        const std::size_t truth_k = order.index_of(p.truth);
        const std::size_t pred_k = order.index_of(p.predicted);
        if (truth_k == pred_k) {
            per_set[truth_k].tp += 1;
            continue;
        }
        const double score = instance_scores(p.truth, p.predicted).dice;
        per_set[pred_k].fp += 1;
        per_set[pred_k].ptp_fp += score;
        per_set[truth_k].fn += 1;
        per_set[truth_k].ptp_fn += score;
    }
    return SetLevelCounts(order, std::move(per_set), static_cast<std::int64_t>(pairs.size()));
}

PRF labelset_prf_exact(const SetLevelCounts& counts, std::size_t k) {
    const SetCounts& c = counts.at(k);
    PRF prf;
    prf.precision = ratio(static_cast<double>(c.tp), c.tp + c.fp);
    prf.recall = ratio(static_cast<double>(c.tp), c.tp + c.fn);
    prf.f1 = f1_score(prf.precision, prf.recall);
    prf.support = c.tp + c.fn;
    return prf;
}

PRF labelset_prf_partial(const SetLevelCounts& counts, std::size_t k) {
    const SetCounts& c = counts.at(k);
    PRF prf;
    prf.precision = ratio(static_cast<double>(c.tp) + c.ptp_fp, c.tp + c.fp);
    prf.recall = ratio(static_cast<double>(c.tp) + c.ptp_fn, c.tp + c.fn);
    prf.f1 = f1_score(prf.precision, prf.recall);
    prf.support = c.tp + c.fn;
    return prf;
}

MicroExact micro_exact(const SetLevelCounts& counts) {
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (const auto& c : counts.per_set()) {
        tp += c.tp;
        fp += c.fp;
        fn += c.fn;
    }
    MicroExact m;
    m.accuracy = ratio(static_cast<double>(tp), counts.n());
    m.precision = ratio(static_cast<double>(tp), tp + fp);
    m.recall = ratio(static_cast<double>(tp), tp + fn);
    m.f1 = f1_score(m.precision, m.recall);
    return m;
}

MicroPartial micro_partial(const SetLevelCounts& counts, const AlignedPairs& pairs) {
    std::int64_t tp = 0, fp = 0, fn = 0;
    double ptp_fp = 0.0, ptp_fn = 0.0;
    for (const auto& c : counts.per_set()) {
        tp += c.tp;
        fp += c.fp;
        fn += c.fn;
        ptp_fp += c.ptp_fp;
        ptp_fn += c.ptp_fn;
    }
    MicroPartial m;
    m.precision = ratio(static_cast<double>(tp) + ptp_fp, tp + fp);
    m.recall = ratio(static_cast<double>(tp) + ptp_fn, tp + fn);
    m.f1 = f1_score(m.precision, m.recall);
    double hamming_sum = 0.0;
    for (const auto& p : pairs.pairs())
        hamming_sum += instance_scores(p.truth, p.predicted).hamming;
    m.partial_accuracy = ratio(hamming_sum, static_cast<std::int64_t>(pairs.size()));
    return m;
}

std::string to_string(MacroPolicy p) {
    switch (p) {
        case MacroPolicy::observed: return "observed";
        case MacroPolicy::truth_supported: return "truth-supported";
        case MacroPolicy::full_powerset: return "full-powerset";
    }
    return "observed";
}

MacroPolicy macro_policy_from_string(std::string_view text) {
    if (text == "observed") return MacroPolicy::observed;
    if (text == "truth-supported") return MacroPolicy::truth_supported;
    if (text == "full-powerset") return MacroPolicy::full_powerset;
    throw ValidationError("unknown macro policy \"" + std::string(text) +
                          "\" (expected observed, truth-supported or full-powerset)");
}

PRF macro_average(const std::vector<PRF>& per_set, const SetLevelCounts& counts,
                  MacroPolicy policy) {
    if (per_set.size() != counts.order().size())
        throw ValidationError("macro average: per-set metric count mismatch");
    double p = 0.0, r = 0.0, f = 0.0;
    std::int64_t denom = 0;
    std::int64_t support = 0;
    for (std::size_t k = 0; k < per_set.size(); ++k) {
        const SetCounts& c = counts.at(k);
        bool include = false;
        switch (policy) {
            case MacroPolicy::observed: include = (c.tp + c.fp + c.fn) > 0; break;
            case MacroPolicy::truth_supported: include = (c.tp + c.fn) > 0; break;
            case MacroPolicy::full_powerset: include = true; break;
        }
        if (!include) continue;
        p += per_set[k].precision;
        r += per_set[k].recall;
        f += per_set[k].f1;
        support += per_set[k].support;
        ++denom;
    }
    if (denom == 0) throw ValidationError("macro average over an empty set of label sets");
    PRF out;
    out.precision = p / static_cast<double>(denom);
    out.recall = r / static_cast<double>(denom);
    out.f1 = f / static_cast<double>(denom);
    out.support = support;
    return out;
}

// Full evaluation ---------------------------------------------------------------

namespace {

MacroBlock macro_block(const std::vector<PRF>& exact, const std::vector<PRF>& partial,
                       const SetLevelCounts& counts, MacroPolicy policy) {
    MacroBlock b;
    b.exact = macro_average(exact, counts, policy);
    b.partial = macro_average(partial, counts, policy);
    std::int64_t denom = 0;
    for (const auto& c : counts.per_set()) {
        switch (policy) {
            case MacroPolicy::observed: denom += (c.tp + c.fp + c.fn) > 0; break;
            case MacroPolicy::truth_supported: denom += (c.tp + c.fn) > 0; break;
            case MacroPolicy::full_powerset: denom += 1; break;
        }
    }
    b.denominator = denom;
    return b;
}

bool close(double a, double b, double tol = 1e-9) { return std::fabs(a - b) <= tol; }

}  // namespace

EvalReport evaluate(const AlignedPairs& pairs, const EvalOptions& options) {
    if (pairs.size() == 0) throw ValidationError("evaluate requires at least one pair");
    const LabelSchema& schema = pairs.schema();
    const PowerSetOrder order = enumerate_powerset(schema);
    const std::int64_t n = static_cast<std::int64_t>(pairs.size());

    EvalReport rep;
    rep.manifest = options.manifest;
    rep.schema_digest = schema.digest();
    rep.labels = schema.labels();
    rep.n = n;
    rep.m = static_cast<std::int64_t>(order.size());
    rep.parse_failures = options.parse_failures;

    // Label layer.
    std::int64_t pool_tp = 0, pool_fp = 0, pool_fn = 0, pool_tn = 0;
    double macro_p = 0.0, macro_r = 0.0, macro_f = 0.0, macro_acc = 0.0;
    for (const auto& name : schema.labels()) {
        LabelMetrics lm = label_prf(pairs, name);
        rep.per_label.push_back(LabelReportEntry{name, lm.counts, lm.prf, lm.accuracy});
        pool_tp += lm.counts.tp;
        pool_fp += lm.counts.fp;
        pool_fn += lm.counts.fn;
        pool_tn += lm.counts.tn;
        macro_p += lm.prf.precision;
        macro_r += lm.prf.recall;
        macro_f += lm.prf.f1;
        macro_acc += lm.accuracy;
    }
    const auto l = static_cast<double>(schema.size());
    rep.label_micro.precision = ratio(static_cast<double>(pool_tp), pool_tp + pool_fp);
    rep.label_micro.recall = ratio(static_cast<double>(pool_tp), pool_tp + pool_fn);
    rep.label_micro.f1 = f1_score(rep.label_micro.precision, rep.label_micro.recall);
    rep.label_micro.support = pool_tp + pool_fn;
    rep.label_micro_accuracy =
        ratio(static_cast<double>(pool_tp + pool_tn), pool_tp + pool_fp + pool_fn + pool_tn);
    rep.label_macro.precision = macro_p / l;
    rep.label_macro.recall = macro_r / l;
    rep.label_macro.f1 = macro_f / l;
    rep.label_macro.support = pool_tp + pool_fn;
    rep.label_macro_accuracy = macro_acc / l;

    // Instance layer.
    double dice_sum = 0.0, hamming_sum = 0.0;
    double overlap_sum = 0.0, size_sum = 0.0;
    for (const auto& p : pairs.pairs()) {
        const InstanceScores s = instance_scores(p.truth, p.predicted);
        dice_sum += s.dice;
        hamming_sum += s.hamming;
        overlap_sum += static_cast<double>(p.truth.intersect(p.predicted).cardinality());
        size_sum += static_cast<double>(p.truth.cardinality() + p.predicted.cardinality());
    }
    rep.instance_dice_mean = dice_sum / static_cast<double>(n);
    rep.instance_hamming_mean = hamming_sum / static_cast<double>(n);
    rep.instance_f1_pooled = size_sum == 0.0 ? 1.0 : 2.0 * overlap_sum / size_sum;

    // Label-set layer.
    const SetLevelCounts counts = labelset_counts(pairs, order);
    std::vector<PRF> exact_prf, partial_prf;
    exact_prf.reserve(order.size());
    partial_prf.reserve(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        exact_prf.push_back(labelset_prf_exact(counts, k));
        partial_prf.push_back(labelset_prf_partial(counts, k));
        const SetCounts& c = counts.at(k);
        SetReportEntry entry;
        entry.binary = format_binary_code(order.at(k), schema);
        entry.textual = format_textual_code(order.at(k), schema);
        entry.counts = c;
        entry.support = c.tp + c.fn;
        entry.no_support = (c.tp + c.fp + c.fn) == 0;
        entry.exact = exact_prf.back();
        entry.partial = partial_prf.back();
        rep.per_set.push_back(std::move(entry));
    }

    rep.exact_micro = micro_exact(counts);
    rep.exact_accuracy = rep.exact_micro.accuracy;
    rep.partial_micro = micro_partial(counts, pairs);
    rep.partial_accuracy = rep.partial_micro.partial_accuracy;
    rep.macro_observed = macro_block(exact_prf, partial_prf, counts, MacroPolicy::observed);
    rep.macro_truth_supported =
        macro_block(exact_prf, partial_prf, counts, MacroPolicy::truth_supported);
    rep.macro_full = macro_block(exact_prf, partial_prf, counts, MacroPolicy::full_powerset);

    // Internal identities. The partial accuracy is recomputed through a third
    // route (per-instance scores grouped by true label set) so all three layers
    // are genuinely compared.
    double grouped_hamming = 0.0;
    {
        std::vector<double> by_set(order.size(), 0.0);
        for (const auto& p : pairs.pairs())
            by_set[order.index_of(p.truth)] += instance_scores(p.truth, p.predicted).hamming;
        for (double v : by_set) grouped_hamming += v;
        grouped_hamming /= static_cast<double>(n);
    }
    double ptp_fp_total = 0.0, ptp_fn_total = 0.0;
    std::int64_t fp_total = 0, fn_total = 0;
    for (const auto& c : counts.per_set()) {
        ptp_fp_total += c.ptp_fp;
        ptp_fn_total += c.ptp_fn;
        fp_total += c.fp;
        fn_total += c.fn;
    }
    bool ok = true;
    ok = ok && close(rep.exact_micro.precision, rep.exact_accuracy, 1e-12);
    ok = ok && close(rep.exact_micro.recall, rep.exact_accuracy, 1e-12);
    ok = ok && close(rep.exact_micro.f1, rep.exact_accuracy, 1e-12);
    ok = ok && (fp_total == fn_total);
    ok = ok && close(ptp_fp_total, ptp_fn_total);
    ok = ok && close(rep.partial_micro.precision, rep.partial_micro.recall, 1e-12);
    ok = ok && close(rep.partial_micro.f1, rep.partial_micro.precision, 1e-12);
    ok = ok && close(rep.partial_accuracy, rep.instance_hamming_mean, 1e-12);
    ok = ok && close(rep.partial_accuracy, rep.label_micro_accuracy, 1e-12);
    ok = ok && close(rep.partial_accuracy, grouped_hamming, 1e-12);
    for (std::size_t k = 0; k < order.size(); ++k)
        ok = ok && exact_prf[k].f1 <= partial_prf[k].f1 + 1e-12;
    rep.self_check_ok = ok;
    return rep;
}

// Serialization -----------------------------------------------------------------

namespace {

ojson prf_to_json(const PRF& p) {
    return ojson{{"precision", round6(p.precision)},
                 {"recall", round6(p.recall)},
                 {"f1", round6(p.f1)},
                 {"support", p.support}};
}

PRF prf_from_json(const ojson& doc) {
    PRF p;
    p.precision = doc.at("precision").get<double>();
    p.recall = doc.at("recall").get<double>();
    p.f1 = doc.at("f1").get<double>();
    p.support = doc.value("support", std::int64_t{0});
    return p;
}

ojson manifest_block(const RunManifest& m) {
    ojson doc;
    doc["model"] = m.model;
    doc["strategy"] = to_string(m.strategy);
    doc["repeat"] = m.repeat;
    if (m.fold) doc["fold"] = *m.fold;
    if (m.seed) doc["seed"] = *m.seed;
    if (!m.timestamp.empty()) doc["timestamp"] = m.timestamp;
    doc["decoding"] = ojson{{"temperature", m.temperature}};
    if (!m.rng.empty()) doc["rng"] = m.rng;
    return doc;
}

RunManifest manifest_from_block(const ojson& doc) {
    RunManifest m;
    m.model = doc.value("model", "");
    m.strategy = strategy_from_string(doc.value("strategy", "zero"));
    m.repeat = doc.value("repeat", 0);
    if (doc.contains("fold") && !doc["fold"].is_null()) m.fold = doc["fold"].get<int>();
    if (doc.contains("seed") && !doc["seed"].is_null())
        m.seed = doc["seed"].get<std::uint64_t>();
    m.timestamp = doc.value("timestamp", "");
    if (doc.contains("decoding") && doc["decoding"].contains("temperature"))
        m.temperature = doc["decoding"]["temperature"].get<double>();
    m.rng = doc.value("rng", "");
    return m;
}

}  // namespace

ojson EvalReport::to_json() const {
    ojson doc;
    doc["version"] = version;
    doc["schema_digest"] = schema_digest;
    doc["labels"] = labels;
    doc["n"] = n;
    doc["m"] = m;
    doc["parse_failures"] = parse_failures;
    doc["manifest"] = manifest_block(manifest);
    doc["self_check_ok"] = self_check_ok;

    ojson lab;
    for (const auto& e : per_label) {
        ojson one = prf_to_json(e.prf);
        one["accuracy"] = round6(e.accuracy);
        one["tp"] = e.counts.tp;
        one["fp"] = e.counts.fp;
        one["fn"] = e.counts.fn;
        one["tn"] = e.counts.tn;
        lab[e.name] = std::move(one);
    }
    doc["label"] = ojson{{"per_label", std::move(lab)},
                         {"micro", prf_to_json(label_micro)},
                         {"micro_accuracy", round6(label_micro_accuracy)},
                         {"macro", prf_to_json(label_macro)},
                         {"macro_accuracy", round6(label_macro_accuracy)}};

    doc["instance"] = ojson{{"dice_mean", round6(instance_dice_mean)},
                            {"f1_pooled", round6(instance_f1_pooled)},
                            {"hamming_mean", round6(instance_hamming_mean)}};

    ojson sets = ojson::array();
    for (const auto& e : per_set) {
        ojson one;
        one["binary"] = e.binary;
        one["textual"] = e.textual;
        one["tp"] = e.counts.tp;
        one["fp"] = e.counts.fp;
        one["fn"] = e.counts.fn;
        one["ptp_fp"] = round6(e.counts.ptp_fp);
        one["ptp_fn"] = round6(e.counts.ptp_fn);
        one["support"] = e.support;
        one["no_support"] = e.no_support;
        one["exact"] = prf_to_json(e.exact);
        one["partial"] = prf_to_json(e.partial);
        sets.push_back(std::move(one));
    }
    doc["label_set"] = std::move(sets);

    doc["exact"] = ojson{{"accuracy", round6(exact_accuracy)},
                         {"micro",
                          ojson{{"precision", round6(exact_micro.precision)},
                                {"recall", round6(exact_micro.recall)},
                                {"f1", round6(exact_micro.f1)}}}};
    doc["partial"] = ojson{{"accuracy", round6(partial_accuracy)},
                           {"micro",
                            ojson{{"precision", round6(partial_micro.precision)},
                                  {"recall", round6(partial_micro.recall)},
                                  {"f1", round6(partial_micro.f1)}}}};
    auto macro_json = [](const MacroBlock& b) {
        return ojson{{"exact", prf_to_json(b.exact)},
                     {"partial", prf_to_json(b.partial)},
                     {"denominator", b.denominator}};
    };
    doc["macro"] = ojson{{"observed", macro_json(macro_observed)},
                         {"truth_supported", macro_json(macro_truth_supported)},
                         {"full_powerset", macro_json(macro_full)}};
    return doc;
}

EvalReport EvalReport::from_json(const ojson& doc) {
    EvalReport rep;
    rep.version = doc.value("version", "mlceval/1");
    rep.schema_digest = doc.value("schema_digest", "");
    if (doc.contains("labels")) rep.labels = doc["labels"].get<std::vector<std::string>>();
    rep.n = doc.value("n", std::int64_t{0});
    rep.m = doc.value("m", std::int64_t{0});
    rep.parse_failures = doc.value("parse_failures", std::int64_t{0});
    if (doc.contains("manifest")) rep.manifest = manifest_from_block(doc["manifest"]);
    rep.self_check_ok = doc.value("self_check_ok", false);

    const ojson& lab = doc.at("label");
    for (const auto& [name, one] : lab.at("per_label").items()) {
        LabelReportEntry e;
        e.name = name;
        e.prf = prf_from_json(one);
        e.accuracy = one.value("accuracy", 0.0);
        e.counts.tp = one.value("tp", std::int64_t{0});
        e.counts.fp = one.value("fp", std::int64_t{0});
        e.counts.fn = one.value("fn", std::int64_t{0});
        e.counts.tn = one.value("tn", std::int64_t{0});
        rep.per_label.push_back(std::move(e));
    }
    rep.label_micro = prf_from_json(lab.at("micro"));
    rep.label_micro_accuracy = lab.value("micro_accuracy", 0.0);
    rep.label_macro = prf_from_json(lab.at("macro"));
    rep.label_macro_accuracy = lab.value("macro_accuracy", 0.0);

    const ojson& inst = doc.at("instance");
    rep.instance_dice_mean = inst.value("dice_mean", 0.0);
    rep.instance_f1_pooled = inst.value("f1_pooled", 0.0);
    rep.instance_hamming_mean = inst.value("hamming_mean", 0.0);

    for (const auto& one : doc.at("label_set")) {
        SetReportEntry e;
        e.binary = one.at("binary").get<std::string>();
        e.textual = one.value("textual", "");
        e.counts.tp = one.value("tp", std::int64_t{0});
        e.counts.fp = one.value("fp", std::int64_t{0});
        e.counts.fn = one.value("fn", std::int64_t{0});
        e.counts.ptp_fp = one.value("ptp_fp", 0.0);
        e.counts.ptp_fn = one.value("ptp_fn", 0.0);
        e.support = one.value("support", std::int64_t{0});
        e.no_support = one.value("no_support", false);
        e.exact = prf_from_json(one.at("exact"));
        e.partial = prf_from_json(one.at("partial"));
        rep.per_set.push_back(std::move(e));
    }

    rep.exact_accuracy = doc.at("exact").at("accuracy").get<double>();
    rep.exact_micro.accuracy = rep.exact_accuracy;
    rep.exact_micro.precision = doc.at("exact").at("micro").at("precision").get<double>();
    rep.exact_micro.recall = doc.at("exact").at("micro").at("recall").get<double>();
    rep.exact_micro.f1 = doc.at("exact").at("micro").at("f1").get<double>();
    rep.partial_accuracy = doc.at("partial").at("accuracy").get<double>();
    rep.partial_micro.precision = doc.at("partial").at("micro").at("precision").get<double>();
    rep.partial_micro.recall = doc.at("partial").at("micro").at("recall").get<double>();
    rep.partial_micro.f1 = doc.at("partial").at("micro").at("f1").get<double>();
    rep.partial_micro.partial_accuracy = rep.partial_accuracy;

    auto macro_from = [](const ojson& b) {
        MacroBlock out;
        out.exact = prf_from_json(b.at("exact"));
        out.partial = prf_from_json(b.at("partial"));
        out.denominator = b.value("denominator", std::int64_t{0});
        return out;
    };
    rep.macro_observed = macro_from(doc.at("macro").at("observed"));
    rep.macro_truth_supported = macro_from(doc.at("macro").at("truth_supported"));
    rep.macro_full = macro_from(doc.at("macro").at("full_powerset"));
    return rep;
}

std::map<std::string, double> EvalReport::flat() const {
    std::map<std::string, double> out;
    out["exact.accuracy"] = exact_accuracy;
    out["exact.micro.precision"] = exact_micro.precision;
    out["exact.micro.recall"] = exact_micro.recall;
    out["exact.micro.f1"] = exact_micro.f1;
    out["partial.accuracy"] = partial_accuracy;
    out["partial.micro.precision"] = partial_micro.precision;
    out["partial.micro.recall"] = partial_micro.recall;
    out["partial.micro.f1"] = partial_micro.f1;
    auto add_macro = [&out](const std::string& name, const MacroBlock& b) {
        out["macro." + name + ".exact.precision"] = b.exact.precision;
        out["macro." + name + ".exact.recall"] = b.exact.recall;
        out["macro." + name + ".exact.f1"] = b.exact.f1;
        out["macro." + name + ".partial.precision"] = b.partial.precision;
        out["macro." + name + ".partial.recall"] = b.partial.recall;
        out["macro." + name + ".partial.f1"] = b.partial.f1;
    };
    add_macro("observed", macro_observed);
    add_macro("truth_supported", macro_truth_supported);
    add_macro("full_powerset", macro_full);
    out["label.micro.precision"] = label_micro.precision;
    out["label.micro.recall"] = label_micro.recall;
    out["label.micro.f1"] = label_micro.f1;
    out["label.micro.accuracy"] = label_micro_accuracy;
    out["label.macro.precision"] = label_macro.precision;
    out["label.macro.recall"] = label_macro.recall;
    out["label.macro.f1"] = label_macro.f1;
    out["label.macro.accuracy"] = label_macro_accuracy;
    for (const auto& e : per_label) {
        const std::string base = "label." + e.name + ".";
        out[base + "precision"] = e.prf.precision;
        out[base + "recall"] = e.prf.recall;
        out[base + "f1"] = e.prf.f1;
        out[base + "accuracy"] = e.accuracy;
    }
    out["instance.dice_mean"] = instance_dice_mean;
    out["instance.f1_pooled"] = instance_f1_pooled;
    out["instance.hamming_mean"] = instance_hamming_mean;
    for (const auto& e : per_set) {
        const std::string base = "set." + e.binary + ".";
        out[base + "exact.precision"] = e.exact.precision;
        out[base + "exact.recall"] = e.exact.recall;
        out[base + "exact.f1"] = e.exact.f1;
        out[base + "partial.precision"] = e.partial.precision;
        out[base + "partial.recall"] = e.partial.recall;
        out[base + "partial.f1"] = e.partial.f1;
    }
    return out;
}

std::string EvalReport::to_tsv() const {
    std::ostringstream out;
    out << "metric\tvalue\n";
    for (const auto& [key, value] : flat()) out << key << '\t' << round6(value) << '\n';
    return out.str();
}

// Aggregation ---------------------------------------------------------------------

AggregateReport aggregate_runs(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw ValidationError("aggregate requires at least one report");
    const std::string digest = reports.front().schema_digest;
    for (const auto& r : reports)
        if (r.schema_digest != digest)
            throw ValidationError("aggregate over mixed schemas (digest " + digest +
                                  " vs " + r.schema_digest + ")");

    std::vector<std::map<std::string, double>> flats;
    flats.reserve(reports.size());
    for (const auto& r : reports) flats.push_back(r.flat());
    for (std::size_t i = 1; i < flats.size(); ++i) {
        if (flats[i].size() != flats[0].size())
            throw ValidationError("aggregate over reports with mixed metric structure");
        auto a = flats[0].begin();
        for (auto b = flats[i].begin(); b != flats[i].end(); ++b, ++a)
            if (a->first != b->first)
                throw ValidationError("aggregate over reports with mixed metric structure (" +
                                      a->first + " vs " + b->first + ")");
    }

    auto stats_over = [](const std::vector<std::map<std::string, double>>& rows) {
        std::map<std::string, AggregateStat> out;
        for (const auto& [key, _] : rows.front()) {
            double sum = 0.0;
            for (const auto& row : rows) sum += row.at(key);
            const double mean = sum / static_cast<double>(rows.size());
            double var = 0.0;
            if (rows.size() > 1) {
                for (const auto& row : rows) {
                    const double d = row.at(key) - mean;
                    var += d * d;
                }
                var /= static_cast<double>(rows.size() - 1);
            }
            out[key] = AggregateStat{mean, std::sqrt(var),
                                     static_cast<std::int64_t>(rows.size())};
        }
        return out;
    };

    AggregateReport agg;
    agg.schema_digest = digest;
    agg.runs = static_cast<std::int64_t>(reports.size());
    agg.metrics = stats_over(flats);

    // Fold-aware variant: mean within each repeat first, then stats across repeats.
    bool any_fold = false;
    for (const auto& r : reports) any_fold = any_fold || r.manifest.fold.has_value();
    if (any_fold) {
        std::map<int, std::vector<std::size_t>> by_repeat;
        for (std::size_t i = 0; i < reports.size(); ++i)
            by_repeat[reports[i].manifest.repeat].push_back(i);
        std::vector<std::map<std::string, double>> repeat_rows;
        for (const auto& [repeat, idxs] : by_repeat) {
            std::map<std::string, double> row;
            for (const auto& [key, _] : flats.front()) {
                double sum = 0.0;
                for (std::size_t i : idxs) sum += flats[i].at(key);
                row[key] = sum / static_cast<double>(idxs.size());
            }
            repeat_rows.push_back(std::move(row));
        }
        agg.per_fold_averaged = stats_over(repeat_rows);
    }
    return agg;
}

ojson AggregateReport::to_json() const {
    ojson doc;
    doc["version"] = version;
    doc["schema_digest"] = schema_digest;
    doc["runs"] = runs;
    auto block = [](const std::map<std::string, AggregateStat>& m) {
        ojson out;
        for (const auto& [key, stat] : m)
            out[key] = ojson{{"mean", round6(stat.mean)},
                             {"std", round6(stat.stddev)},
                             {"count", stat.count}};
        return out;
    };
    doc["metrics"] = block(metrics);
    if (!per_fold_averaged.empty()) doc["per_fold_averaged"] = block(per_fold_averaged);
    return doc;
}

std::string AggregateReport::to_tsv() const {
    std::ostringstream out;
    out << "metric\tmean\tstd\tcount\n";
    for (const auto& [key, stat] : metrics)
        out << key << '\t' << round6(stat.mean) << '\t' << round6(stat.stddev) << '\t'
            << stat.count << '\n';
    return out.str();
}

AggregateReport AggregateReport::from_json(const ojson& doc) {
    AggregateReport agg;
    agg.version = doc.value("version", "mlceval/1");
    agg.schema_digest = doc.value("schema_digest", "");
    agg.runs = doc.value("runs", std::int64_t{0});
    auto block = [](const ojson& src) {
        std::map<std::string, AggregateStat> out;
        for (const auto& [key, v] : src.items())
            out[key] = AggregateStat{v.value("mean", 0.0), v.value("std", 0.0),
                                     v.value("count", std::int64_t{0})};
        return out;
    };
    if (doc.contains("metrics")) agg.metrics = block(doc["metrics"]);
    if (doc.contains("per_fold_averaged"))
        agg.per_fold_averaged = block(doc["per_fold_averaged"]);
    return agg;
}

}  // namespace mlceval
