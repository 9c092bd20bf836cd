#include "failtax/classify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <openssl/evp.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "failtax/errors.hpp"
#include "failtax/io_util.hpp"
#include "failtax/text.hpp"

namespace failtax {

namespace {

std::atomic<std::uint64_t> g_llm_requests{0};

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    EVP_Digest(data.data(), data.size(), digest, &digest_len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0x0f]);
    }
    return out;
}

bool has_token(const std::string& folded, std::string_view token) {
    std::size_t i = 0;
    const std::size_t n = folded.size();
    auto is_word = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    };
    while (i < n) {
        while (i < n && !is_word(folded[i])) {
            ++i;
        }
        std::size_t start = i;
        while (i < n && is_word(folded[i])) {
            ++i;
        }
        if (std::string_view(folded).substr(start, i - start) == token) {
            return true;
        }
    }
    return false;
}

bool keyword_hits(const std::string& folded, std::string_view keyword) {
    // Very short single words ("ui") match whole tokens only; everything else
    // is a plain substring check.
    if (keyword.size() <= 3 && keyword.find(' ') == std::string_view::npos) {
        return has_token(folded, keyword);
    }
    return folded.find(keyword) != std::string::npos;
}

struct EndpointParts {
    std::string scheme_host_port;
    std::string path_prefix;  // "" or "/something", no trailing slash
};

EndpointParts split_endpoint(const std::string& endpoint) {
    std::string e{trim(endpoint)};
    while (!e.empty() && e.back() == '/') {
        e.pop_back();
    }
    const std::size_t scheme = e.find("://");
    const std::size_t path_start = e.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_start == std::string::npos) {
        return {e, ""};
    }
    return {e.substr(0, path_start), e.substr(path_start)};
}

bool transient_status(int status) {
    return status == 429 || status >= 500;
}

std::string request_chat_completion(const BackendConfig& cfg, std::string_view prompt_body) {
    if (cfg.endpoint.empty()) {
        throw BackendUnavailable("no endpoint configured for the remote backend");
    }
    const char* key = std::getenv(cfg.credential_env.c_str());
    if (key == nullptr || *key == '\0') {
        throw InvalidCredential("environment variable " + cfg.credential_env + " is not set");
    }

    nlohmann::ordered_json payload;
    payload["model"] = cfg.model;
    payload["temperature"] = cfg.temperature;
    payload["messages"] = nlohmann::ordered_json::array(
        {nlohmann::ordered_json{{"role", "user"}, {"content", std::string(prompt_body)}}});
    const std::string body = payload.dump();

    const EndpointParts parts = split_endpoint(cfg.endpoint);
    const std::string path = parts.path_prefix + "/v1/chat/completions";
    const httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

    std::string last_error;
    const int attempts = cfg.retry_limit + 1;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            const auto delay = std::chrono::milliseconds(
                static_cast<long long>(cfg.retry_base_ms) << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }
        g_llm_requests.fetch_add(1, std::memory_order_relaxed);

        httplib::Client client(parts.scheme_host_port);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(120, 0);
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            throw InvalidCredential("endpoint returned HTTP " + std::to_string(res->status));
        }
        if (transient_status(res->status)) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw BackendUnavailable("HTTP " + std::to_string(res->status) + ": " + res->body);
        }

        nlohmann::json reply;
        try {
            reply = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error&) {
            throw BackendUnavailable("endpoint returned unparseable JSON");
        }
        if (!reply.contains("choices") || !reply["choices"].is_array() ||
            reply["choices"].empty() || !reply["choices"][0].contains("message") ||
            !reply["choices"][0]["message"].contains("content") ||
            !reply["choices"][0]["message"]["content"].is_string()) {
            throw BackendUnavailable("reply missing choices[0].message.content");
        }
        return reply["choices"][0]["message"]["content"].get<std::string>();
    }
    throw BackendUnavailable(last_error + " after " + std::to_string(attempts) + " attempts");
}

void validate_config(const BackendConfig& cfg) {
    if (cfg.max_in_flight < 1) {
        throw Error("max_in_flight must be >= 1");
    }
    if (cfg.temperature < 0.0 || cfg.temperature > 2.0) {
        throw Error("temperature must be within [0, 2]");
    }
}

}  // namespace

std::string_view backend_kind_tag(BackendKind kind) {
    switch (kind) {
        case BackendKind::RemoteLlm: return "remote-llm";
        case BackendKind::KeywordOracle: return "keyword-oracle";
        case BackendKind::Replay: return "replay";
    }
    return "keyword-oracle";
}

std::optional<BackendKind> parse_backend_kind(std::string_view tag) {
    const std::string folded = fold_ascii(trim(tag));
    if (folded == "remote-llm" || folded == "llm") return BackendKind::RemoteLlm;
    if (folded == "keyword-oracle" || folded == "oracle") return BackendKind::KeywordOracle;
    if (folded == "replay") return BackendKind::Replay;
    return std::nullopt;
}

ResponseCache::ResponseCache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return;  // cold cache
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw MalformedRecord(line_no, std::string("invalid cache line: ") + e.what());
        }
        if (!doc.is_object() || !doc.contains("key") || !doc["key"].is_string() ||
            !doc.contains("reply") || !doc["reply"].is_string()) {
            throw MalformedRecord(line_no, "expected {\"key\": hex, \"reply\": text}");
        }
        entries_[doc["key"].get<std::string>()] = doc["reply"].get<std::string>();
    }
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mu_);
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void ResponseCache::insert(const std::string& key, std::string reply) {
    std::lock_guard<std::mutex> lock(mu_);
    entries_[key] = std::move(reply);
    dirty_ = true;
}

std::size_t ResponseCache::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
}

bool ResponseCache::dirty() const {
    std::lock_guard<std::mutex> lock(mu_);
    return dirty_;
}

std::string ResponseCache::to_jsonl() const {
    std::vector<std::pair<std::string, std::string>> sorted;
    {
        std::lock_guard<std::mutex> lock(mu_);
        sorted.assign(entries_.begin(), entries_.end());
    }
    std::sort(sorted.begin(), sorted.end());
    std::string out;
    for (const auto& [key, reply] : sorted) {
        nlohmann::ordered_json doc;
        doc["key"] = key;
        doc["reply"] = reply;
        out += doc.dump();
        out += '\n';
    }
    return out;
}

void ResponseCache::save(const std::filesystem::path& path) const {
    write_file_atomic(path, to_jsonl());
}

std::string cache_key(const BackendConfig& backend, PromptVersion version,
                      std::string_view rendered_body) {
    const BackendKind key_kind =
        backend.kind == BackendKind::Replay ? BackendKind::RemoteLlm : backend.kind;
    std::string material;
    material += backend_kind_tag(key_kind);
    material += '\x1f';
    material += backend.model;
    material += '\x1f';
    material += nlohmann::json(backend.temperature).dump();
    material += '\x1f';
    material += version_tag(version);
    material += '\x1f';
    material += rendered_body;
    return sha256_hex(material);
}

FailureType keyword_oracle(std::string_view cause) {
    struct Rule {
        FailureType label;
        std::vector<std::string_view> keywords;
    };
    // First matching rule wins. "faulty" covers defect descriptions that
    // never say "bug"; "incorrectly date" covers date-rollover regressions;
    // "lack of" covers missing-support causes that are not software defects.
    static const std::vector<Rule> rules = {
        {FailureType::DataBreach, {"breach", "leaked data"}},
        {FailureType::SecurityVulnerability, {"vulnerability", "exploit", "ransomware"}},
        {FailureType::Outage, {"outage", "downtime"}},
        {FailureType::RegressionBug, {"regression", "after update broke", "incorrectly date"}},
        {FailureType::PerformanceIssue, {"slow", "latency"}},
        {FailureType::IntegrationIssue, {"integration", "third-party api"}},
        {FailureType::UiUxBug, {"ui", "display"}},
        {FailureType::NonSoftwareCause,
         {"not software", "lack of", "unsupported", "hardware failure", "human error"}},
        {FailureType::FunctionalityBug, {"bug", "malfunction", "faulty"}},
    };

    const std::string folded = fold_ascii(cause);
    for (const Rule& rule : rules) {
        for (std::string_view keyword : rule.keywords) {
            if (keyword_hits(folded, keyword)) {
                return rule.label;
            }
        }
    }
    return FailureType::Other;
}

std::uint64_t llm_request_count() {
    return g_llm_requests.load(std::memory_order_relaxed);
}

ClassificationResult classify_record(const IncidentRecord& record, PromptVersion version,
                                     const BackendConfig& backend, ResponseCache& cache,
                                     std::span<const FewShotExample> examples) {
    const RenderedPrompt prompt = render_prompt(version, record.cause, examples);
    const std::string key = cache_key(backend, version, prompt.body);

    std::string raw_reply;
    bool cached = false;
    if (auto hit = cache.lookup(key)) {
        raw_reply = std::move(*hit);
        cached = true;
    } else {
        switch (backend.kind) {
            case BackendKind::KeywordOracle:
                raw_reply = display_text(keyword_oracle(record.cause));
                break;
            case BackendKind::Replay:
                throw CacheMiss(record.id);
            case BackendKind::RemoteLlm:
                raw_reply = request_chat_completion(backend, prompt.body);
                cache.insert(key, raw_reply);
                break;
        }
    }

    const NormalizedLabel normalized = normalize_label(raw_reply);
    ClassificationResult result;
    result.record_id = record.id;
    result.raw_reply = std::move(raw_reply);
    result.label = normalized.type;
    result.non_canonical = normalized.non_canonical();
    result.prompt_version = version;
    result.backend_kind = std::string(backend_kind_tag(backend.kind));
    result.cached = cached;
    return result;
}

std::size_t BatchResult::non_canonical_count() const {
    return static_cast<std::size_t>(
        std::count_if(results.begin(), results.end(),
                      [](const ClassificationResult& r) { return r.non_canonical; }));
}

namespace {

BatchResult collect_outcomes(const Dataset& ds,
                             std::vector<std::optional<ClassificationResult>>&& slots,
                             std::vector<std::optional<RecordFailure>>&& errors) {
    BatchResult batch;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        if (slots[i]) {
            batch.results.push_back(std::move(*slots[i]));
        } else if (errors[i]) {
            batch.failures.push_back(std::move(*errors[i]));
        }
    }
    if (!ds.records.empty() && batch.results.empty()) {
        std::string detail;
        const std::size_t shown = std::min<std::size_t>(batch.failures.size(), 20);
        for (std::size_t i = 0; i < shown; ++i) {
            if (i > 0) {
                detail += "; ";
            }
            detail += batch.failures[i].message;
        }
        if (batch.failures.size() > shown) {
            detail += "; +" + std::to_string(batch.failures.size() - shown) + " more";
        }
        throw AllRecordsFailed(ds.records.size(), detail);
    }
    return batch;
}

}  // namespace

BatchResult classify_dataset_serial(const Dataset& ds, PromptVersion version,
                                    const BackendConfig& backend, ResponseCache& cache,
                                    std::span<const FewShotExample> examples) {
    validate_config(backend);
    const std::size_t n = ds.records.size();
    std::vector<std::optional<ClassificationResult>> slots(n);
    std::vector<std::optional<RecordFailure>> errors(n);
    for (std::size_t i = 0; i < n; ++i) {
        try {
            slots[i] = classify_record(ds.records[i], version, backend, cache, examples);
        } catch (const std::exception& e) {
            errors[i] = RecordFailure{ds.records[i].id, e.what()};
        }
    }
    return collect_outcomes(ds, std::move(slots), std::move(errors));
}

BatchResult classify_dataset(const Dataset& ds, PromptVersion version,
                             const BackendConfig& backend, ResponseCache& cache,
                             std::span<const FewShotExample> examples) {
    validate_config(backend);
    const std::size_t n = ds.records.size();
#ifdef _OPENMP
    if (backend.max_in_flight > 1 && n > 1) {
        std::vector<std::optional<ClassificationResult>> slots(n);
        std::vector<std::optional<RecordFailure>> errors(n);
        const int threads = static_cast<int>(
            std::min<std::size_t>(static_cast<std::size_t>(backend.max_in_flight), n));
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
            const auto idx = static_cast<std::size_t>(i);
            try {
                slots[idx] = classify_record(ds.records[idx], version, backend, cache, examples);
            } catch (const std::exception& e) {
                errors[idx] = RecordFailure{ds.records[idx].id, e.what()};
            }
        }
        return collect_outcomes(ds, std::move(slots), std::move(errors));
    }
#endif
    return classify_dataset_serial(ds, version, backend, cache, examples);
}

std::string results_to_jsonl(std::span<const ClassificationResult> results) {
    std::string out;
    for (const ClassificationResult& r : results) {
        nlohmann::ordered_json doc;
        doc["record_id"] = r.record_id;
        doc["raw_reply"] = r.raw_reply;
        doc["label"] = std::string(display_text(r.label));
        doc["non_canonical"] = r.non_canonical;
        doc["prompt_version"] = std::string(version_tag(r.prompt_version));
        doc["backend_kind"] = r.backend_kind;
        doc["cached"] = r.cached;
        out += doc.dump();
        out += '\n';
    }
    return out;
}

std::vector<ClassificationResult> parse_results_jsonl(std::istream& in) {
    std::vector<ClassificationResult> results;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw MalformedRecord(line_no, std::string("invalid JSON: ") + e.what());
        }
        for (const char* key : {"record_id", "raw_reply", "label", "backend_kind"}) {
            if (!doc.contains(key) || !doc[key].is_string()) {
                throw MalformedRecord(line_no, std::string("missing string field '") + key + "'");
            }
        }
        for (const char* key : {"non_canonical", "cached"}) {
            if (!doc.contains(key) || !doc[key].is_boolean()) {
                throw MalformedRecord(line_no, std::string("missing boolean field '") + key + "'");
            }
        }
        if (!doc.contains("prompt_version") || !doc["prompt_version"].is_string()) {
            throw MalformedRecord(line_no, "missing string field 'prompt_version'");
        }

        ClassificationResult r;
        r.record_id = doc["record_id"].get<std::string>();
        r.raw_reply = doc["raw_reply"].get<std::string>();
        const std::string label = doc["label"].get<std::string>();
        const auto parsed = parse_exact_label(label);
        if (!parsed) {
            throw MalformedRecord(line_no, "label '" + label + "' is not canonical");
        }
        r.label = *parsed;
        r.non_canonical = doc["non_canonical"].get<bool>();
        const auto version = parse_version_tag(doc["prompt_version"].get<std::string>());
        if (!version) {
            throw MalformedRecord(line_no, "unknown prompt_version");
        }
        r.prompt_version = *version;
        r.backend_kind = doc["backend_kind"].get<std::string>();
        r.cached = doc["cached"].get<bool>();
        results.push_back(std::move(r));
    }
    return results;
}

std::vector<ClassificationResult> load_results_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure(path.string(), "cannot open results file");
    }
    return parse_results_jsonl(in);
}

}  // namespace failtax
