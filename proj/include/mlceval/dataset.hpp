#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mlceval/labelspace.hpp"

namespace mlceval {

struct AnnotatedInstance {
    std::string id;
    std::optional<std::string> text;
    LabelSet truth;
};

// An annotated corpus. Ids are unique; input order is preserved.
class Corpus {
public:
    Corpus(LabelSchema schema, std::vector<AnnotatedInstance> instances);

    const LabelSchema& schema() const noexcept { return schema_; }
    const std::vector<AnnotatedInstance>& instances() const noexcept { return instances_; }
    std::size_t size() const noexcept { return instances_.size(); }

private:
    LabelSchema schema_;
    std::vector<AnnotatedInstance> instances_;
};

struct PredictionRecord {
    std::string id;
    LabelSet predicted;
    std::optional<std::string> raw;  // verbatim model output, when available
};

// A prediction whose model output could not be turned into a label set.
struct FailedPrediction {
    std::string id;
    std::string raw;
    std::string reason;
};

enum class Strategy { zero, guide, tune };

std::string to_string(Strategy s);
Strategy strategy_from_string(std::string_view text);

struct RunManifest {
    std::string model;
    Strategy strategy = Strategy::zero;
    int repeat = 0;
    std::optional<int> fold;
    std::optional<std::uint64_t> seed;
    std::string timestamp;   // ISO-8601 UTC; empty when not applicable
    double temperature = 0.0;
    std::string rng;         // generator identity for synthetic runs
};

struct AlignedPair {
    std::string id;
    LabelSet truth;
    LabelSet predicted;
};

// Id-joined (truth, prediction) sequence in corpus order.
class AlignedPairs {
public:
    AlignedPairs(LabelSchema schema, std::vector<AlignedPair> pairs);

    const LabelSchema& schema() const noexcept { return schema_; }
    const std::vector<AlignedPair>& pairs() const noexcept { return pairs_; }
    std::size_t size() const noexcept { return pairs_.size(); }

private:
    LabelSchema schema_;
    std::vector<AlignedPair> pairs_;
};

enum class AlignMode { strict, lenient };

struct AlignResult {
    AlignedPairs pairs;
    std::vector<std::string> dropped_corpus_ids;      // lenient mode only
    std::vector<std::string> dropped_prediction_ids;  // lenient mode only
};

AlignResult align(const Corpus& corpus, const std::vector<PredictionRecord>& predictions,
                  AlignMode mode = AlignMode::strict);

// Descriptive distribution statistics over a corpus.
struct DistributionSummary {
    std::size_t n = 0;
    std::size_t total_single_labels = 0;
    std::vector<std::size_t> label_counts;        // per schema position
    std::vector<double> label_proportions;        // count / total_single_labels
    std::vector<std::size_t> set_counts;          // per canonical power-set index
    std::vector<std::size_t> cardinality_histogram;  // index = cardinality, size L+1
    std::vector<std::size_t> unobserved_sets;     // canonical indices with count 0
};

DistributionSummary corpus_stats(const Corpus& corpus);

// File formats ----------------------------------------------------------------
//
// Corpus file: line-delimited JSON, one instance per line:
//   {"id": "n0001", "labels": "1-0-1-0", "text": "..."}
// "labels" is either a binary code or a name-to-0/1 map covering every schema
// label. "text" is optional. Unknown fields are ignored with a warning.
//
// Prediction file: first line is a manifest record
//   {"type": "manifest", "model": ..., "strategy": ..., "repeat": ..., ...}
// followed by one record per instance:
//   {"id": "n0001", "labels": "1-1-0-0", "raw": "..."}
// or, for unparseable model output:
//   {"id": "n0002", "failed": true, "raw": "...", "reason": "..."}

LabelSchema load_schema(std::istream& in);
LabelSchema load_schema_file(const std::string& path);

Corpus load_corpus(std::istream& in, const LabelSchema& schema,
                   std::vector<std::string>* warnings = nullptr);
Corpus load_corpus_file(const std::string& path, const LabelSchema& schema,
                        std::vector<std::string>* warnings = nullptr);
void write_corpus(std::ostream& out, const Corpus& corpus);

struct PredictionFile {
    RunManifest manifest;
    std::vector<PredictionRecord> records;
    std::vector<FailedPrediction> failures;
    std::vector<std::string> warnings;
};

PredictionFile load_predictions(std::istream& in, const LabelSchema& schema);
PredictionFile load_predictions_file(const std::string& path, const LabelSchema& schema);
void write_predictions(std::ostream& out, const LabelSchema& schema,
                       const RunManifest& manifest,
                       const std::vector<PredictionRecord>& records,
                       const std::vector<FailedPrediction>& failures = {});

}  // namespace mlceval
