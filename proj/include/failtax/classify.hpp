#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "failtax/ingest.hpp"
#include "failtax/prompt.hpp"
#include "failtax/taxonomy.hpp"

namespace failtax {

enum class BackendKind : std::uint8_t {
    RemoteLlm,      // OpenAI-compatible chat completions endpoint
    KeywordOracle,  // deterministic offline stand-in
    Replay,         // answers exclusively from the response cache
};

std::string_view backend_kind_tag(BackendKind kind);
std::optional<BackendKind> parse_backend_kind(std::string_view tag);

struct BackendConfig {
    BackendKind kind = BackendKind::KeywordOracle;
    std::string endpoint;  // e.g. "https://api.openai.com"; remote only
    std::string model = "gpt-3.5-turbo";
    double temperature = 0.0;
    int max_in_flight = 4;
    int retry_limit = 3;  // retries after the first attempt
    std::string credential_env = "FAILTAX_API_KEY";
    int retry_base_ms = 1000;  // backoff base, doubled per retry
};

struct ClassificationResult {
    std::string record_id;
    std::string raw_reply;
    FailureType label = FailureType::Other;
    bool non_canonical = false;
    PromptVersion prompt_version = PromptVersion::V2;
    std::string backend_kind;
    bool cached = false;
};

// Content-addressed reply store keyed by hash of (backend kind, model,
// temperature, prompt version, rendered prompt body). Identical inputs always
// produce identical keys, so replayed runs are reproducible byte for byte.
// Concurrent lookups and insertions are safe; equal keys carry equal values
// by construction, so last-write-wins is harmless.
class ResponseCache {
public:
    ResponseCache() = default;
    // Loads JSONL lines of {"key": hex digest, "reply": text}; a missing file
    // yields an empty cache.
    explicit ResponseCache(const std::filesystem::path& path);

    std::optional<std::string> lookup(const std::string& key) const;
    void insert(const std::string& key, std::string reply);
    std::size_t size() const;
    bool dirty() const;

    // Key-sorted for stable bytes across runs.
    std::string to_jsonl() const;
    void save(const std::filesystem::path& path) const;

private:
    mutable std::mutex mu_;
    std::unordered_map<std::string, std::string> entries_;
    bool dirty_ = false;
};

// SHA-256 hex digest over the reply-determining inputs. The replay backend
// shares the remote keyspace (it exists to re-serve remote replies).
std::string cache_key(const BackendConfig& backend, PromptVersion version,
                      std::string_view rendered_body);

// Ordered first-match-wins rule table over case-insensitive keywords. Labels
// every bundled few-shot example the same way the example bank does.
FailureType keyword_oracle(std::string_view cause);

// Number of HTTP requests issued by the remote backend since process start.
// Oracle and replay runs must leave this untouched.
std::uint64_t llm_request_count();

// Renders the prompt, resolves the reply (cache, then backend), normalizes
// it onto the taxonomy and stamps provenance. Throws BackendUnavailable,
// InvalidCredential, CacheMiss.
ClassificationResult classify_record(const IncidentRecord& record, PromptVersion version,
                                     const BackendConfig& backend, ResponseCache& cache,
                                     std::span<const FewShotExample> examples = {});

struct RecordFailure {
    std::string record_id;
    std::string message;
};

struct BatchResult {
    std::vector<ClassificationResult> results;  // successes, dataset order
    std::vector<RecordFailure> failures;        // failed records, dataset order
    std::size_t non_canonical_count() const;
};

// Classifies every record, isolating per-record failures so one bad article
// cannot abort a database-scale run. Output order always matches dataset
// order regardless of scheduling. Throws AllRecordsFailed only when no record
// succeeds.
//
// Issues up to backend.max_in_flight concurrent backend calls (OpenMP).
BatchResult classify_dataset(const Dataset& ds, PromptVersion version,
                             const BackendConfig& backend, ResponseCache& cache,
                             std::span<const FewShotExample> examples = {});

// Single-threaded reference implementation; classify_dataset must match it
// result for result.
BatchResult classify_dataset_serial(const Dataset& ds, PromptVersion version,
                                    const BackendConfig& backend, ResponseCache& cache,
                                    std::span<const FewShotExample> examples = {});

std::string results_to_jsonl(std::span<const ClassificationResult> results);
std::vector<ClassificationResult> parse_results_jsonl(std::istream& in);
std::vector<ClassificationResult> load_results_jsonl(const std::filesystem::path& path);

}  // namespace failtax
