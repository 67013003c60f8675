#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mlceval/dataset.hpp"
#include "mlceval/prompt.hpp"

namespace mlceval {

enum class ParseStatus { clean, repaired, failed };

std::string to_string(ParseStatus s);

struct ParseOutcome {
    ParseStatus status = ParseStatus::failed;
    std::optional<LabelSet> labels;  // absent iff failed
    std::string raw;
    std::string repair_note;  // rule applied for repaired outcomes
};

// Total parser for model output. Clean when the text is exactly a binary
// code. Repaired when a single unambiguous code is recoverable: tolerated
// variants are alternative separators (comma/space and friends), surrounding
// brackets/quotes/prose around one embedded code, and a name-to-0/1 list
// covering every schema label. Failed otherwise; never throws.
ParseOutcome parse_output(std::string_view text, const LabelSchema& schema);

struct RetryPolicy {
    int max_attempts = 3;
    double backoff_base_ms = 250.0;
    bool retry_on_transport_error = true;     // timeouts, connection failures
    bool retry_on_server_error = true;        // any 5xx
    std::set<int> retryable_statuses = {408, 429};
};

struct BackendConfig {
    std::string endpoint;                 // e.g. "http://127.0.0.1:8080"
    std::string base_path = "/v1";        // chat completions under <base>/chat/completions
    std::string model;
    std::string credential_env = "MLCEVAL_API_KEY";  // bearer token env var; never stored
    double temperature = 0.0;
    int timeout_ms = 30000;
    int max_in_flight = 4;
    RetryPolicy retry;
};

struct RunInfo {
    std::optional<Strategy> strategy;  // defaults from the template id
    int repeat = 0;
    std::optional<int> fold;
    std::optional<std::uint64_t> seed;
};

struct BatchTelemetry {
    std::int64_t requests = 0;
    std::int64_t retries = 0;
};

struct BatchResult {
    std::vector<PredictionRecord> predictions;  // corpus order, parse failures omitted
    std::vector<FailedPrediction> failures;     // backend or parse failures, corpus order
    RunManifest manifest;
    BatchTelemetry telemetry;
};

// Classifies every instance through the chat-completions endpoint with at
// most max_in_flight concurrent requests, retrying per policy with
// exponential backoff and full jitter. Output order equals corpus order
// regardless of completion order; failures are collected, never dropped.
BatchResult classify_batch(const Corpus& corpus, const PromptTemplate& tmpl,
                           const BackendConfig& config, const RunInfo& info = {});

}  // namespace mlceval
