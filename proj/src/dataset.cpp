#include "mlceval/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace mlceval {

using ojson = nlohmann::ordered_json;

// Strategy --------------------------------------------------------------------

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::zero: return "zero";
        case Strategy::guide: return "guide";
        case Strategy::tune: return "tune";
    }
    return "zero";
}

Strategy strategy_from_string(std::string_view text) {
    if (text == "zero") return Strategy::zero;
    if (text == "guide") return Strategy::guide;
    if (text == "tune") return Strategy::tune;
    throw ValidationError("unknown strategy \"" + std::string(text) +
                          "\" (expected zero, guide or tune)");
}

// Corpus ----------------------------------------------------------------------

Corpus::Corpus(LabelSchema schema, std::vector<AnnotatedInstance> instances)
    : schema_(std::move(schema)), instances_(std::move(instances)) {
    std::unordered_set<std::string> seen;
    for (const auto& inst : instances_) {
        if (inst.id.empty()) throw ValidationError("instance with empty id");
        if (!seen.insert(inst.id).second)
            throw ValidationError("duplicate instance id \"" + inst.id + "\"");
        if (inst.truth.width() != schema_.size())
            throw ValidationError("instance \"" + inst.id + "\" has label width " +
                                  std::to_string(inst.truth.width()) +
                                  "; schema expects " + std::to_string(schema_.size()));
    }
}

AlignedPairs::AlignedPairs(LabelSchema schema, std::vector<AlignedPair> pairs)
    : schema_(std::move(schema)), pairs_(std::move(pairs)) {
    for (const auto& p : pairs_) {
        if (p.truth.width() != schema_.size() || p.predicted.width() != schema_.size())
            throw ValidationError("aligned pair \"" + p.id + "\" width mismatch");
    }
}

AlignResult align(const Corpus& corpus, const std::vector<PredictionRecord>& predictions,
                  AlignMode mode) {
    std::unordered_map<std::string, const PredictionRecord*> by_id;
    std::unordered_set<std::string> corpus_ids;
    for (const auto& inst : corpus.instances()) corpus_ids.insert(inst.id);

    std::vector<std::string> unknown_ids;
    for (const auto& rec : predictions) {
        if (rec.predicted.width() != corpus.schema().size())
            throw ValidationError("prediction for \"" + rec.id + "\" has label width " +
                                  std::to_string(rec.predicted.width()) +
                                  "; schema expects " +
                                  std::to_string(corpus.schema().size()));
        if (!by_id.emplace(rec.id, &rec).second)
            throw ValidationError("duplicate prediction for id \"" + rec.id + "\"");
        if (!corpus_ids.count(rec.id)) unknown_ids.push_back(rec.id);
    }

    AlignResult result{AlignedPairs(corpus.schema(), {}), {}, {}};
    std::vector<AlignedPair> pairs;
    std::vector<std::string> missing;
    pairs.reserve(corpus.size());
    for (const auto& inst : corpus.instances()) {
        auto it = by_id.find(inst.id);
        if (it == by_id.end()) {
            missing.push_back(inst.id);
            continue;
        }
        pairs.push_back(AlignedPair{inst.id, inst.truth, it->second->predicted});
    }

    if (mode == AlignMode::strict) {
        if (!missing.empty())
            throw ValidationError("missing prediction for id \"" + missing.front() + "\"" +
                                  (missing.size() > 1
                                       ? " (and " + std::to_string(missing.size() - 1) +
                                             " more)"
                                       : ""));
        if (!unknown_ids.empty())
            throw ValidationError("prediction for unknown id \"" + unknown_ids.front() +
                                  "\"" +
                                  (unknown_ids.size() > 1
                                       ? " (and " + std::to_string(unknown_ids.size() - 1) +
                                             " more)"
                                       : ""));
    }

    result.pairs = AlignedPairs(corpus.schema(), std::move(pairs));
    result.dropped_corpus_ids = std::move(missing);
    result.dropped_prediction_ids = std::move(unknown_ids);
    return result;
}

DistributionSummary corpus_stats(const Corpus& corpus) {
    if (corpus.size() == 0)
        throw ValidationError("corpus statistics require at least one instance");
    const std::size_t l = corpus.schema().size();
    const PowerSetOrder order = enumerate_powerset(corpus.schema());

    DistributionSummary s;
    s.n = corpus.size();
    s.label_counts.assign(l, 0);
    s.set_counts.assign(order.size(), 0);
    s.cardinality_histogram.assign(l + 1, 0);

    for (const auto& inst : corpus.instances()) {
        s.set_counts[order.index_of(inst.truth)] += 1;
        s.cardinality_histogram[inst.truth.cardinality()] += 1;
        for (std::size_t i = 0; i < l; ++i)
            if (inst.truth.contains(i)) s.label_counts[i] += 1;
    }
    for (std::size_t i = 0; i < l; ++i) s.total_single_labels += s.label_counts[i];
    s.label_proportions.assign(l, 0.0);
    if (s.total_single_labels > 0) {
        for (std::size_t i = 0; i < l; ++i)
            s.label_proportions[i] = static_cast<double>(s.label_counts[i]) /
                                     static_cast<double>(s.total_single_labels);
    }
    for (std::size_t k = 0; k < order.size(); ++k)
        if (s.set_counts[k] == 0) s.unobserved_sets.push_back(k);
    return s;
}

// File I/O --------------------------------------------------------------------

namespace {

ojson parse_json_line(const std::string& line, std::size_t line_no) {
    try {
        return ojson::parse(line);
    } catch (const std::exception& e) {
        throw ParseError("line " + std::to_string(line_no) + ": invalid JSON (" +
                         e.what() + ")");
    }
}

LabelSet labels_from_json(const ojson& value, const LabelSchema& schema,
                          std::size_t line_no) {
    if (value.is_string()) {
        try {
            return parse_binary_code(value.get<std::string>(), schema);
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (value.is_object()) {
        std::uint32_t bits = 0;
        std::size_t covered = 0;
        for (const auto& [name, bit] : value.items()) {
            auto pos = schema.find(name);
            if (!pos)
                throw ParseError("line " + std::to_string(line_no) +
                                 ": unknown label \"" + name + "\" in label map");
            if (!bit.is_number_integer() ||
                (bit.get<int>() != 0 && bit.get<int>() != 1))
                throw ParseError("line " + std::to_string(line_no) + ": label \"" + name +
                                 "\" must map to 0 or 1");
            covered += 1;
            if (bit.get<int>() == 1) bits |= 1u << *pos;
        }
        if (covered != schema.size())
            throw ParseError("line " + std::to_string(line_no) +
                             ": label map covers " + std::to_string(covered) + " of " +
                             std::to_string(schema.size()) + " schema labels");
        return LabelSet(schema.size(), bits);
    }
    throw ParseError("line " + std::to_string(line_no) +
                     ": \"labels\" must be a binary code string or a label map");
}

void warn_unknown_fields(const ojson& rec, const std::set<std::string>& known,
                         std::size_t line_no, std::vector<std::string>* warnings) {
    if (!warnings) return;
    for (const auto& [key, _] : rec.items()) {
        if (!known.count(key))
            warnings->push_back("line " + std::to_string(line_no) +
                                ": ignored unknown field \"" + key + "\"");
    }
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file \"" + path + "\"");
    return in;
}

}  // namespace

LabelSchema load_schema(std::istream& in) {
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    // JSON form: {"labels": ["SI", ...]}; otherwise one label name per line.
    std::size_t first = content.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && content[first] == '{') {
        ojson doc;
        try {
            doc = ojson::parse(content);
        } catch (const std::exception& e) {
            throw ParseError(std::string("invalid schema document: ") + e.what());
        }
        if (!doc.contains("labels") || !doc["labels"].is_array())
            throw ParseError("schema document must contain a \"labels\" array");
        std::vector<std::string> labels;
        for (const auto& v : doc["labels"]) {
            if (!v.is_string()) throw ParseError("schema labels must be strings");
            labels.push_back(v.get<std::string>());
        }
        return LabelSchema(std::move(labels));
    }
    std::vector<std::string> labels;
    std::istringstream lines(content);
    std::string line;
    while (std::getline(lines, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (!line.empty()) labels.push_back(line);
    }
    return LabelSchema(std::move(labels));
}

LabelSchema load_schema_file(const std::string& path) {
    auto in = open_input(path);
    return load_schema(in);
}

Corpus load_corpus(std::istream& in, const LabelSchema& schema,
                   std::vector<std::string>* warnings) {
    static const std::set<std::string> known{"id", "labels", "text"};
    std::vector<AnnotatedInstance> instances;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ojson rec = parse_json_line(line, line_no);
        if (!rec.is_object())
            throw ParseError("line " + std::to_string(line_no) + ": record must be an object");
        if (!rec.contains("id") || !rec["id"].is_string())
            throw ParseError("line " + std::to_string(line_no) + ": missing string field \"id\"");
        if (!rec.contains("labels"))
            throw ParseError("line " + std::to_string(line_no) + ": missing field \"labels\"");
        warn_unknown_fields(rec, known, line_no, warnings);
        AnnotatedInstance inst;
        inst.id = rec["id"].get<std::string>();
        inst.truth = labels_from_json(rec["labels"], schema, line_no);
        if (rec.contains("text")) {
            if (!rec["text"].is_string())
                throw ParseError("line " + std::to_string(line_no) + ": \"text\" must be a string");
            inst.text = rec["text"].get<std::string>();
        }
        instances.push_back(std::move(inst));
    }
    return Corpus(schema, std::move(instances));
}

Corpus load_corpus_file(const std::string& path, const LabelSchema& schema,
                        std::vector<std::string>* warnings) {
    auto in = open_input(path);
    return load_corpus(in, schema, warnings);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
    for (const auto& inst : corpus.instances()) {
        ojson rec;
        rec["id"] = inst.id;
        rec["labels"] = format_binary_code(inst.truth, corpus.schema());
        if (inst.text) rec["text"] = *inst.text;
        out << rec.dump() << '\n';
    }
}

namespace {

ojson manifest_to_json(const RunManifest& m) {
    ojson doc;
    doc["type"] = "manifest";
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

RunManifest manifest_from_json(const ojson& doc, std::size_t line_no) {
    RunManifest m;
    if (!doc.contains("model") || !doc["model"].is_string())
        throw ParseError("line " + std::to_string(line_no) +
                         ": manifest missing string field \"model\"");
    m.model = doc["model"].get<std::string>();
    if (!doc.contains("strategy") || !doc["strategy"].is_string())
        throw ParseError("line " + std::to_string(line_no) +
                         ": manifest missing string field \"strategy\"");
    m.strategy = strategy_from_string(doc["strategy"].get<std::string>());
    if (doc.contains("repeat")) m.repeat = doc["repeat"].get<int>();
    if (m.repeat < 0)
        throw ParseError("line " + std::to_string(line_no) + ": repeat must be >= 0");
    if (doc.contains("fold") && !doc["fold"].is_null()) m.fold = doc["fold"].get<int>();
    if (doc.contains("seed") && !doc["seed"].is_null())
        m.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("timestamp")) m.timestamp = doc["timestamp"].get<std::string>();
    if (doc.contains("decoding") && doc["decoding"].contains("temperature"))
        m.temperature = doc["decoding"]["temperature"].get<double>();
    if (doc.contains("rng")) m.rng = doc["rng"].get<std::string>();
    return m;
}

}  // namespace

PredictionFile load_predictions(std::istream& in, const LabelSchema& schema) {
    static const std::set<std::string> known{"id", "labels", "raw", "failed", "reason"};
    PredictionFile file;
    std::string line;
    std::size_t line_no = 0;
    bool have_manifest = false;
    std::unordered_set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ojson rec = parse_json_line(line, line_no);
        if (!have_manifest) {
            if (!rec.is_object() || rec.value("type", "") != "manifest")
                throw ParseError("line " + std::to_string(line_no) +
                                 ": prediction file must begin with a manifest record");
            file.manifest = manifest_from_json(rec, line_no);
            have_manifest = true;
            continue;
        }
        if (!rec.contains("id") || !rec["id"].is_string())
            throw ParseError("line " + std::to_string(line_no) + ": missing string field \"id\"");
        const std::string id = rec["id"].get<std::string>();
        if (!seen.insert(id).second)
            throw ParseError("line " + std::to_string(line_no) +
                             ": duplicate prediction for id \"" + id + "\"");
        warn_unknown_fields(rec, known, line_no, &file.warnings);
        if (rec.value("failed", false)) {
            FailedPrediction f;
            f.id = id;
            f.raw = rec.value("raw", "");
            f.reason = rec.value("reason", "");
            file.failures.push_back(std::move(f));
            continue;
        }
        if (!rec.contains("labels"))
            throw ParseError("line " + std::to_string(line_no) + ": missing field \"labels\"");
        PredictionRecord p;
        p.id = id;
        p.predicted = labels_from_json(rec["labels"], schema, line_no);
        if (rec.contains("raw")) p.raw = rec["raw"].get<std::string>();
        file.records.push_back(std::move(p));
    }
    if (!have_manifest) throw ParseError("prediction file is empty (manifest expected)");
    return file;
}

PredictionFile load_predictions_file(const std::string& path, const LabelSchema& schema) {
    auto in = open_input(path);
    return load_predictions(in, schema);
}

void write_predictions(std::ostream& out, const LabelSchema& schema,
                       const RunManifest& manifest,
                       const std::vector<PredictionRecord>& records,
                       const std::vector<FailedPrediction>& failures) {
    out << manifest_to_json(manifest).dump() << '\n';
    for (const auto& rec : records) {
        ojson doc;
        doc["id"] = rec.id;
        doc["labels"] = format_binary_code(rec.predicted, schema);
        if (rec.raw) doc["raw"] = *rec.raw;
        out << doc.dump() << '\n';
    }
    for (const auto& f : failures) {
        ojson doc;
        doc["id"] = f.id;
        doc["failed"] = true;
        doc["raw"] = f.raw;
        doc["reason"] = f.reason;
        out << doc.dump() << '\n';
    }
}

}  // namespace mlceval
