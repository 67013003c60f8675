#include "mlceval/gateway.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace mlceval {

using ojson = nlohmann::ordered_json;

std::string to_string(ParseStatus s) {
    switch (s) {
        case ParseStatus::clean: return "clean";
        case ParseStatus::repaired: return "repaired";
        case ParseStatus::failed: return "failed";
    }
    return "failed";
}

// Output parsing ------------------------------------------------------------------

namespace {

bool is_sep(char c) {
    return c == '-' || c == ',' || c == '/' || c == '_' || c == ' ' || c == '\t' ||
           c == '\n' || c == '\r';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_word(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Exact grammar: L tokens of 0/1 joined by single dashes, nothing else.
bool is_clean_code(std::string_view text, std::size_t l) {
    if (text.size() != 2 * l - 1) return false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i % 2 == 0) {
            if (text[i] != '0' && text[i] != '1') return false;
        } else if (text[i] != '-') {
            return false;
        }
    }
    return true;
}

std::string_view trim(std::string_view text) {
    std::size_t b = 0, e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    return text.substr(b, e - b);
}

// Maximal digit runs with separators between digits. A run is a code
// candidate iff it holds exactly L digits, all of them 0 or 1.
std::vector<std::string> scan_candidates(std::string_view text, std::size_t l) {
    std::vector<std::string> candidates;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_digit(text[i])) {
            ++i;
            continue;
        }
        std::string digits;
        bool binary = true;
        std::size_t j = i;
        while (j < text.size() && is_digit(text[j])) {
            // consume one digit, then any separators leading to the next digit
            digits += text[j];
            binary = binary && (text[j] == '0' || text[j] == '1');
            std::size_t next = j + 1;
            std::size_t skip = next;
            while (skip < text.size() && is_sep(text[skip])) ++skip;
            if (skip < text.size() && is_digit(text[skip]) && skip > next)
                j = skip;
            else if (next < text.size() && is_digit(text[next]))
                j = next;
            else {
                j = next;
                break;
            }
        }
        if (binary && digits.size() == l) candidates.push_back(digits);
        i = j;
    }
    return candidates;
}

// Name-to-value rule: every schema label appears as a standalone word with an
// unambiguous 0/1 value after an optional ':', '=' or '-'.
std::optional<LabelSet> parse_label_value_list(std::string_view text,
                                               const LabelSchema& schema) {
    std::uint32_t bits = 0;
    for (std::size_t pos = 0; pos < schema.size(); ++pos) {
        const std::string& name = schema.label(pos);
        std::optional<int> value;
        std::size_t from = 0;
        while (true) {
            const std::size_t hit = text.find(name, from);
            if (hit == std::string_view::npos) break;
            from = hit + 1;
            if (hit > 0 && is_word(text[hit - 1])) continue;
            std::size_t after = hit + name.size();
            if (after < text.size() && is_word(text[after])) continue;
            while (after < text.size() &&
                   (text[after] == ':' || text[after] == '=' || text[after] == '-' ||
                    text[after] == ' ' || text[after] == '\t'))
                ++after;
            if (after >= text.size()) continue;
            if (text[after] != '0' && text[after] != '1') continue;
            if (after + 1 < text.size() && is_digit(text[after + 1])) continue;
            const int v = text[after] - '0';
            if (value && *value != v) return std::nullopt;  // conflicting values
            value = v;
        }
        if (!value) return std::nullopt;
        if (*value == 1) bits |= 1u << pos;
    }
    return LabelSet(schema.size(), bits);
}

LabelSet set_from_digits(const std::string& digits, std::size_t l) {
    std::uint32_t bits = 0;
    for (std::size_t i = 0; i < l; ++i)
        if (digits[i] == '1') bits |= 1u << i;
    return LabelSet(l, bits);
}

}  // namespace

ParseOutcome parse_output(std::string_view text, const LabelSchema& schema) {
    ParseOutcome out;
    out.raw = std::string(text);
    const std::size_t l = schema.size();

    const std::string_view trimmed = trim(text);
    if (is_clean_code(trimmed, l)) {
        out.status = ParseStatus::clean;
        std::string digits;
        for (char c : trimmed)
            if (c == '0' || c == '1') digits += c;
        out.labels = set_from_digits(digits, l);
        return out;
    }

    auto candidates = scan_candidates(text, l);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    if (candidates.size() == 1) {
        out.status = ParseStatus::repaired;
        out.labels = set_from_digits(candidates.front(), l);
        out.repair_note = "single embedded code";
        return out;
    }
    if (candidates.size() > 1) {
        out.status = ParseStatus::failed;
        out.repair_note = "ambiguous: " + std::to_string(candidates.size()) +
                          " candidate codes";
        return out;
    }

    if (auto labels = parse_label_value_list(text, schema)) {
        out.status = ParseStatus::repaired;
        out.labels = labels;
        out.repair_note = "label-value list";
        return out;
    }

    out.status = ParseStatus::failed;
    out.repair_note = "no recoverable code";
    return out;
}

// Batch client --------------------------------------------------------------------

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool retryable(const RetryPolicy& policy, bool transport_error, int status) {
    if (transport_error) return policy.retry_on_transport_error;
    if (policy.retryable_statuses.count(status)) return true;
    if (status >= 500 && status < 600) return policy.retry_on_server_error;
    return false;
}

struct RequestOutcome {
    bool ok = false;
    std::string content;  // assistant message on success
    std::string error;    // reason on failure
    int retries = 0;
    int requests = 0;
};

RequestOutcome run_request(httplib::Client& client, const BackendConfig& cfg,
                           const std::string& body, const httplib::Headers& headers,
                           std::mt19937_64& jitter) {
    RequestOutcome out;
    const std::string path = cfg.base_path + "/chat/completions";
    for (int attempt = 0; attempt < cfg.retry.max_attempts; ++attempt) {
        if (attempt > 0) {
            // exponential backoff with full jitter
            const double unit =
                static_cast<double>(jitter() >> 11) * 0x1.0p-53;
            const double delay =
                cfg.retry.backoff_base_ms * static_cast<double>(1 << (attempt - 1)) * unit;
            std::this_thread::sleep_for(
                std::chrono::microseconds(static_cast<long>(delay * 1000.0)));
            ++out.retries;
        }
        ++out.requests;
        httplib::Result res = client.Post(path, headers, body, "application/json");
        bool transport_error = !res;
        int status = transport_error ? 0 : res->status;
        if (!transport_error && status == 200) {
            try {
                const ojson doc = ojson::parse(res->body);
                out.content = doc.at("choices").at(0).at("message").at("content")
                                  .get<std::string>();
                out.ok = true;
                return out;
            } catch (const std::exception& e) {
                out.error = std::string("malformed response body: ") + e.what();
                return out;  // not retryable; the endpoint answered
            }
        }
        const std::string reason =
            transport_error ? ("transport error: " + httplib::to_string(res.error()))
                            : ("status " + std::to_string(status));
        if (!retryable(cfg.retry, transport_error, status)) {
            out.error = reason;
            return out;
        }
        out.error = reason + " after " + std::to_string(attempt + 1) + " attempts";
    }
    return out;
}

}  // namespace

BatchResult classify_batch(const Corpus& corpus, const PromptTemplate& tmpl,
                           const BackendConfig& cfg, const RunInfo& info) {
    if (cfg.endpoint.empty()) throw ValidationError("backend endpoint is required");
    if (cfg.model.empty()) throw ValidationError("backend model identifier is required");
    if (cfg.max_in_flight < 1) throw ValidationError("max in-flight requests must be >= 1");
    if (cfg.retry.max_attempts < 1) throw ValidationError("retry attempts must be >= 1");
    for (const auto& inst : corpus.instances())
        if (!inst.text || inst.text->empty())
            throw ValidationError("instance \"" + inst.id + "\" has no text to classify");
    if (corpus.size() > 0)  // template problems surface before any request is made
        render_prompt(tmpl, corpus.schema(), *corpus.instances().front().text);

    const std::size_t n = corpus.size();
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.max_in_flight), n);

    httplib::Headers headers;
    if (!cfg.credential_env.empty()) {
        if (const char* token = std::getenv(cfg.credential_env.c_str()); token && *token)
            headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    struct Slot {
        bool ok = false;
        LabelSet labels;
        std::string raw;
        std::string reason;
    };
    std::vector<Slot> slots(n);
    std::atomic<std::size_t> next{0};
    std::atomic<std::int64_t> requests{0};
    std::atomic<std::int64_t> retries{0};

    auto worker = [&](std::size_t worker_id) {
        httplib::Client client(cfg.endpoint);
        client.set_connection_timeout(0, cfg.timeout_ms * 1000);
        client.set_read_timeout(cfg.timeout_ms / 1000, (cfg.timeout_ms % 1000) * 1000);
        client.set_write_timeout(cfg.timeout_ms / 1000, (cfg.timeout_ms % 1000) * 1000);
        std::mt19937_64 jitter(0x6a697474ULL + worker_id);
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            const auto& inst = corpus.instances()[i];
            try {
                ojson body;
                body["model"] = cfg.model;
                ojson messages = ojson::array();
                for (const auto& msg : render_prompt(tmpl, corpus.schema(), *inst.text))
                    messages.push_back(ojson{{"role", msg.role}, {"content", msg.content}});
                body["messages"] = std::move(messages);
                body["temperature"] = cfg.temperature;

                RequestOutcome res = run_request(client, cfg, body.dump(), headers, jitter);
                requests += res.requests;
                retries += res.retries;
                if (!res.ok) {
                    slots[i].reason = "backend: " + res.error;
                    continue;
                }
                const ParseOutcome parsed = parse_output(res.content, corpus.schema());
                slots[i].raw = res.content;
                if (parsed.status == ParseStatus::failed) {
                    slots[i].reason = "parse: " + parsed.repair_note;
                    continue;
                }
                slots[i].ok = true;
                slots[i].labels = *parsed.labels;
            } catch (const std::exception& e) {
                slots[i].reason = std::string("internal: ") + e.what();
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();

    BatchResult result;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& inst = corpus.instances()[i];
        if (slots[i].ok)
            result.predictions.push_back(
                PredictionRecord{inst.id, slots[i].labels, slots[i].raw});
        else
            result.failures.push_back(
                FailedPrediction{inst.id, slots[i].raw, slots[i].reason});
    }
    result.manifest.model = cfg.model;
    result.manifest.strategy = info.strategy.value_or(
        tmpl.id == PromptTemplate::Id::guide ? Strategy::guide : Strategy::zero);
    result.manifest.repeat = info.repeat;
    result.manifest.fold = info.fold;
    result.manifest.seed = info.seed;
    result.manifest.temperature = cfg.temperature;
    result.manifest.timestamp = utc_timestamp();
    result.telemetry.requests = requests.load();
    result.telemetry.retries = retries.load();
    return result;
}

}  // namespace mlceval
