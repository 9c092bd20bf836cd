#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "failtax/classify.hpp"
#include "failtax/errors.hpp"
#include "failtax/prompt.hpp"
#include "test_util.hpp"

using namespace failtax;

namespace {

IncidentRecord record_of(std::string id, std::string cause, std::string industry = "Finance") {
    IncidentRecord record;
    record.id = std::move(id);
    record.cause = std::move(cause);
    record.industry = Industry{std::move(industry)};
    return record;
}

Dataset oracle_playground(std::size_t count) {
    const char* causes[] = {
        "Unpatched vulnerability allowed remote code execution.",
        "A software bug caused incorrect totals.",
        "Data breach exposed records of users.",
        "Nationwide outage took down the service.",
        "Integration with the payment gateway failed.",
        "Undisclosed technical issue affected operations.",
        "Severe latency degraded the checkout flow.",
        "UI layout overlapped buttons on the settings screen.",
        "Regression after the latest update broke sign-in.",
        "Hardware failure, not software, halted kiosks.",
    };
    const char* industries[] = {"Finance", "Retail", "Government"};
    Dataset ds;
    for (std::size_t i = 0; i < count; ++i) {
        ds.records.push_back(record_of("r" + std::to_string(i),
                                       std::string(causes[i % 10]) + " #" + std::to_string(i),
                                       industries[i % 3]));
    }
    return ds;
}

// In-process chat-completions endpoint for wire-protocol tests.
class MockServer {
public:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    explicit MockServer(Handler handler) : handler_(std::move(handler)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            hits_.fetch_add(1);
            handler_(req, res);
        });
        server_.Post("/proxy/v1/chat/completions", [this](const httplib::Request& req,
                                                          httplib::Response& res) {
            prefixed_hits_.fetch_add(1);
            handler_(req, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockServer() {
        server_.stop();
        thread_.join();
    }

    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
    int hits() const { return hits_.load(); }
    int prefixed_hits() const { return prefixed_hits_.load(); }

    static void reply_label(httplib::Response& res, const std::string& label) {
        nlohmann::json body = {
            {"id", "chatcmpl-test"},
            {"choices",
             {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", label}}}}}},
        };
        res.set_content(body.dump(), "application/json");
    }

private:
    httplib::Server server_;
    Handler handler_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> hits_{0};
    std::atomic<int> prefixed_hits_{0};
};

BackendConfig remote_config(const std::string& endpoint) {
    BackendConfig cfg;
    cfg.kind = BackendKind::RemoteLlm;
    cfg.endpoint = endpoint;
    cfg.retry_base_ms = 1;  // keep retry tests fast
    return cfg;
}

struct EnvGuard {
    EnvGuard(const char* name, const char* value) : name_(name) {
        const char* old = std::getenv(name);
        had_ = old != nullptr;
        if (had_) {
            old_ = old;
        }
        if (value != nullptr) {
            ::setenv(name, value, 1);
        } else {
            ::unsetenv(name);
        }
    }
    ~EnvGuard() {
        if (had_) {
            ::setenv(name_, old_.c_str(), 1);
        } else {
            ::unsetenv(name_);
        }
    }
    const char* name_;
    bool had_;
    std::string old_;
};

}  // namespace

TEST_CASE("backend kind tags round-trip and accept short names") {
    CHECK(backend_kind_tag(BackendKind::RemoteLlm) == "remote-llm");
    CHECK(backend_kind_tag(BackendKind::KeywordOracle) == "keyword-oracle");
    CHECK(backend_kind_tag(BackendKind::Replay) == "replay");
    CHECK(parse_backend_kind("llm") == BackendKind::RemoteLlm);
    CHECK(parse_backend_kind("remote-llm") == BackendKind::RemoteLlm);
    CHECK(parse_backend_kind("oracle") == BackendKind::KeywordOracle);
    CHECK(parse_backend_kind("keyword-oracle") == BackendKind::KeywordOracle);
    CHECK(parse_backend_kind("Replay ") == BackendKind::Replay);
    CHECK_FALSE(parse_backend_kind("gpt").has_value());
}

TEST_CASE("keyword oracle labels representative causes") {
    CHECK(keyword_oracle("Ransomware exploited an unpatched vulnerability") ==
          FailureType::SecurityVulnerability);
    CHECK(keyword_oracle("Scheduled maintenance notice") == FailureType::Other);
    CHECK(keyword_oracle("Customer data breach at the processor") == FailureType::DataBreach);
    CHECK(keyword_oracle("Planned downtime overran") == FailureType::Outage);
    CHECK(keyword_oracle("Checkout got very slow") == FailureType::PerformanceIssue);
    CHECK(keyword_oracle("Third-party API returned garbage") == FailureType::IntegrationIssue);
    CHECK(keyword_oracle("The display froze mid-flight") == FailureType::UiUxBug);
    CHECK(keyword_oracle("Human error during a migration") == FailureType::NonSoftwareCause);
    CHECK(keyword_oracle("A billing malfunction double-charged users") ==
          FailureType::FunctionalityBug);
    CHECK(keyword_oracle("") == FailureType::Other);
}

TEST_CASE("keyword oracle reproduces the bundled example labels") {
    const auto& bank = bundled_example_bank();
    REQUIRE(bank.size() == 3);
    CHECK(keyword_oracle(bank[0].cause) == FailureType::FunctionalityBug);
    CHECK(keyword_oracle(bank[1].cause) == FailureType::RegressionBug);
    CHECK(keyword_oracle(bank[2].cause) == FailureType::NonSoftwareCause);
}

TEST_CASE("keyword oracle rule order and token matching") {
    // Earlier rules shadow later ones.
    CHECK(keyword_oracle("Outage after a data breach") == FailureType::DataBreach);
    CHECK(keyword_oracle("A regression made pages slow") == FailureType::RegressionBug);
    CHECK(keyword_oracle("Exploit caused heavy downtime") == FailureType::SecurityVulnerability);

    // "ui" must match a whole token, not the inside of a word.
    CHECK(keyword_oracle("GUI glitch everywhere") == FailureType::Other);
    CHECK(keyword_oracle("The UI, frankly, is broken") == FailureType::UiUxBug);
    CHECK(keyword_oracle("Quite a quick build") == FailureType::Other);
}

TEST_CASE("cache keys depend on every reply-determining input") {
    BackendConfig remote;
    remote.kind = BackendKind::RemoteLlm;
    const std::string base = cache_key(remote, PromptVersion::V2, "body");

    CHECK(base == cache_key(remote, PromptVersion::V2, "body"));
    CHECK(base.size() == 64);  // sha-256 hex

    BackendConfig other_model = remote;
    other_model.model = "gpt-4";
    CHECK(base != cache_key(other_model, PromptVersion::V2, "body"));

    BackendConfig warm = remote;
    warm.temperature = 0.7;
    CHECK(base != cache_key(warm, PromptVersion::V2, "body"));

    CHECK(base != cache_key(remote, PromptVersion::V1, "body"));
    CHECK(base != cache_key(remote, PromptVersion::V2, "other body"));

    // Irrelevant knobs leave the key alone.
    BackendConfig tuned = remote;
    tuned.max_in_flight = 32;
    tuned.retry_limit = 9;
    CHECK(base == cache_key(tuned, PromptVersion::V2, "body"));

    SUBCASE("replay shares the remote keyspace") {
        BackendConfig replay = remote;
        replay.kind = BackendKind::Replay;
        CHECK(base == cache_key(replay, PromptVersion::V2, "body"));

        BackendConfig oracle = remote;
        oracle.kind = BackendKind::KeywordOracle;
        CHECK(base != cache_key(oracle, PromptVersion::V2, "body"));
    }
}

TEST_CASE("response cache stores, saves sorted and reloads") {
    ResponseCache cache;
    CHECK_FALSE(cache.dirty());
    CHECK(cache.size() == 0);
    CHECK_FALSE(cache.lookup("zz").has_value());

    cache.insert("zz", "Outage");
    cache.insert("aa", "Data Breach");
    CHECK(cache.dirty());
    CHECK(cache.size() == 2);
    CHECK(cache.lookup("zz") == "Outage");

    const std::string jsonl = cache.to_jsonl();
    CHECK(jsonl.find("aa") < jsonl.find("zz"));  // key-sorted output

    testutil::TempDir dir;
    cache.save(dir / "cache.jsonl");
    ResponseCache reloaded(dir / "cache.jsonl");
    CHECK_FALSE(reloaded.dirty());
    CHECK(reloaded.size() == 2);
    CHECK(reloaded.lookup("aa") == "Data Breach");
    CHECK(reloaded.to_jsonl() == jsonl);

    SUBCASE("a missing cache file is just empty") {
        ResponseCache empty(dir / "absent.jsonl");
        CHECK(empty.size() == 0);
    }
}

TEST_CASE("classify_record with the oracle stamps provenance") {
    ResponseCache cache;
    BackendConfig oracle;  // defaults to the keyword oracle
    const auto result = classify_record(record_of("r1", "Nationwide outage hit the site"),
                                        PromptVersion::V2, oracle, cache);
    CHECK(result.record_id == "r1");
    CHECK(result.label == FailureType::Outage);
    CHECK(result.raw_reply == "Outage");
    CHECK_FALSE(result.non_canonical);
    CHECK(result.prompt_version == PromptVersion::V2);
    CHECK(result.backend_kind == "keyword-oracle");
    CHECK_FALSE(result.cached);
    CHECK_FALSE(cache.dirty());  // the oracle never writes the cache

    SUBCASE("a warmed cache entry shadows the oracle") {
        const RenderedPrompt prompt =
            render_prompt(PromptVersion::V2, "Nationwide outage hit the site");
        cache.insert(cache_key(oracle, PromptVersion::V2, prompt.body), "Data Breach");
        const auto shadowed = classify_record(record_of("r1", "Nationwide outage hit the site"),
                                              PromptVersion::V2, oracle, cache);
        CHECK(shadowed.cached);
        CHECK(shadowed.label == FailureType::DataBreach);
    }
}

TEST_CASE("replay serves only from the cache") {
    BackendConfig replay;
    replay.kind = BackendKind::Replay;
    ResponseCache cache;

    SUBCASE("cold cache misses carry the record id") {
        try {
            classify_record(record_of("art-17", "Some cause"), PromptVersion::V2, replay, cache);
            FAIL("expected CacheMiss");
        } catch (const CacheMiss& e) {
            CHECK(e.record_id == "art-17");
            CHECK(std::string(e.what()).find("art-17") != std::string::npos);
        }
    }

    SUBCASE("a remote-warmed entry replays, prose replies get normalized") {
        BackendConfig remote = replay;
        remote.kind = BackendKind::RemoteLlm;
        const RenderedPrompt prompt = render_prompt(PromptVersion::V2, "Some cause");
        cache.insert(cache_key(remote, PromptVersion::V2, prompt.body),
                     "The failure type is: Outage");

        const auto result =
            classify_record(record_of("art-17", "Some cause"), PromptVersion::V2, replay, cache);
        CHECK(result.cached);
        CHECK(result.label == FailureType::Outage);
        CHECK(result.non_canonical);
        CHECK(result.backend_kind == "replay");
        CHECK(result.raw_reply == "The failure type is: Outage");
    }
}

TEST_CASE("classify_dataset output is independent of max_in_flight") {
    const std::uint64_t requests_before = llm_request_count();
    const Dataset ds = oracle_playground(50);

    BackendConfig serial;
    serial.max_in_flight = 1;
    BackendConfig wide;
    wide.max_in_flight = 8;

    ResponseCache cache_a;
    ResponseCache cache_b;
    ResponseCache cache_c;
    const BatchResult a = classify_dataset(ds, PromptVersion::V2, serial, cache_a);
    const BatchResult b = classify_dataset(ds, PromptVersion::V2, wide, cache_b);
    const BatchResult c = classify_dataset_serial(ds, PromptVersion::V2, wide, cache_c);

    REQUIRE(a.results.size() == 50);
    CHECK(a.failures.empty());
    CHECK(results_to_jsonl(a.results) == results_to_jsonl(b.results));
    CHECK(results_to_jsonl(a.results) == results_to_jsonl(c.results));

    // Results come back in dataset order.
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        CHECK(b.results[i].record_id == ds.records[i].id);
    }

    CHECK(llm_request_count() == requests_before);  // oracle runs stay offline
}

TEST_CASE("classify_dataset isolates per-record failures") {
    Dataset ds = oracle_playground(3);
    ds.records[1].cause = "   ";  // renders as empty, fails that record only

    ResponseCache cache;
    BackendConfig oracle;
    const BatchResult batch = classify_dataset(ds, PromptVersion::V2, oracle, cache);
    REQUIRE(batch.results.size() == 2);
    REQUIRE(batch.failures.size() == 1);
    CHECK(batch.failures[0].record_id == "r1");
    CHECK(batch.results[0].record_id == "r0");
    CHECK(batch.results[1].record_id == "r2");
}

TEST_CASE("classify_dataset throws AllRecordsFailed only when nothing succeeds") {
    const std::uint64_t requests_before = llm_request_count();
    const Dataset ds = oracle_playground(3);
    BackendConfig replay;
    replay.kind = BackendKind::Replay;
    ResponseCache cold;

    try {
        classify_dataset(ds, PromptVersion::V2, replay, cold);
        FAIL("expected AllRecordsFailed");
    } catch (const AllRecordsFailed& e) {
        const std::string what = e.what();
        CHECK(what.find("all 3 records failed") != std::string::npos);
        CHECK(what.find("r0") != std::string::npos);
        CHECK(what.find("r1") != std::string::npos);
        CHECK(what.find("r2") != std::string::npos);
    }

    SUBCASE("empty dataset yields an empty batch instead") {
        Dataset empty;
        const BatchResult batch = classify_dataset(empty, PromptVersion::V2, replay, cold);
        CHECK(batch.results.empty());
        CHECK(batch.failures.empty());
    }

    CHECK(llm_request_count() == requests_before);  // replay runs stay offline
}

TEST_CASE("results serialize to JSONL and back") {
    const Dataset ds = oracle_playground(10);
    ResponseCache cache;
    BackendConfig oracle;
    const BatchResult batch = classify_dataset(ds, PromptVersion::V2, oracle, cache);

    const std::string jsonl = results_to_jsonl(batch.results);
    std::istringstream in(jsonl);
    const std::vector<ClassificationResult> reloaded = parse_results_jsonl(in);

    REQUIRE(reloaded.size() == batch.results.size());
    for (std::size_t i = 0; i < reloaded.size(); ++i) {
        CHECK(reloaded[i].record_id == batch.results[i].record_id);
        CHECK(reloaded[i].label == batch.results[i].label);
        CHECK(reloaded[i].non_canonical == batch.results[i].non_canonical);
        CHECK(reloaded[i].prompt_version == batch.results[i].prompt_version);
        CHECK(reloaded[i].backend_kind == batch.results[i].backend_kind);
        CHECK(reloaded[i].cached == batch.results[i].cached);
        CHECK(reloaded[i].raw_reply == batch.results[i].raw_reply);
    }
    CHECK(results_to_jsonl(reloaded) == jsonl);

    SUBCASE("labels outside the taxonomy are rejected on load") {
        std::istringstream bad(
            "{\"record_id\":\"x\",\"raw_reply\":\"r\",\"label\":\"Mystery\","
            "\"non_canonical\":false,\"prompt_version\":\"v2\",\"backend_kind\":"
            "\"keyword-oracle\",\"cached\":false}\n");
        CHECK_THROWS_AS(parse_results_jsonl(bad), MalformedRecord);
    }
}

TEST_CASE("remote backend speaks the chat-completions protocol") {
    EnvGuard key("FAILTAX_API_KEY", "test-key-123");

    std::string seen_auth;
    std::string seen_body;
    MockServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        seen_body = req.body;
        MockServer::reply_label(res, "Outage");
    });

    BackendConfig cfg = remote_config(server.endpoint());
    ResponseCache cache;
    const IncidentRecord record = record_of("wire-1", "Everything went down.");
    const auto result = classify_record(record, PromptVersion::V2, cfg, cache);

    CHECK(result.label == FailureType::Outage);
    CHECK(result.raw_reply == "Outage");
    CHECK_FALSE(result.cached);
    CHECK(result.backend_kind == "remote-llm");
    CHECK(server.hits() == 1);

    SUBCASE("the request carries credentials, model, temperature and the prompt") {
        CHECK(seen_auth == "Bearer test-key-123");
        const auto payload = nlohmann::json::parse(seen_body);
        CHECK(payload["model"] == "gpt-3.5-turbo");
        CHECK(payload["temperature"] == 0.0);
        REQUIRE(payload["messages"].size() == 1);
        CHECK(payload["messages"][0]["role"] == "user");
        const std::string content = payload["messages"][0]["content"];
        CHECK(content ==
              render_prompt(PromptVersion::V2, "Everything went down.").body);
    }

    SUBCASE("the reply lands in the cache and short-circuits the next call") {
        CHECK(cache.dirty());
        const auto again = classify_record(record, PromptVersion::V2, cfg, cache);
        CHECK(again.cached);
        CHECK(again.label == FailureType::Outage);
        CHECK(server.hits() == 1);  // no second request
    }
}

TEST_CASE("remote backend honors an endpoint path prefix") {
    EnvGuard key("FAILTAX_API_KEY", "k");
    MockServer server(
        [&](const httplib::Request&, httplib::Response& res) { MockServer::reply_label(res, "Other"); });

    BackendConfig cfg = remote_config(server.endpoint() + "/proxy/");
    ResponseCache cache;
    classify_record(record_of("p1", "whatever cause"), PromptVersion::V0, cfg, cache);
    CHECK(server.prefixed_hits() == 1);
    CHECK(server.hits() == 0);
}

TEST_CASE("remote backend retries transient failures with backoff") {
    EnvGuard key("FAILTAX_API_KEY", "k");
    std::atomic<int> calls{0};
    MockServer server([&](const httplib::Request&, httplib::Response& res) {
        const int call = calls.fetch_add(1);
        if (call < 2) {
            res.status = call == 0 ? 500 : 429;
            res.set_content("busy", "text/plain");
        } else {
            MockServer::reply_label(res, "Outage");
        }
    });

    const std::uint64_t before = llm_request_count();
    BackendConfig cfg = remote_config(server.endpoint());
    cfg.retry_limit = 3;
    ResponseCache cache;
    const auto result =
        classify_record(record_of("retry-1", "it failed"), PromptVersion::V1, cfg, cache);
    CHECK(result.label == FailureType::Outage);
    CHECK(server.hits() == 3);
    CHECK(llm_request_count() - before == 3);
}

TEST_CASE("remote backend gives up after retry_limit + 1 attempts") {
    EnvGuard key("FAILTAX_API_KEY", "k");
    MockServer server([&](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
        res.set_content("down", "text/plain");
    });

    BackendConfig cfg = remote_config(server.endpoint());
    cfg.retry_limit = 1;
    ResponseCache cache;
    try {
        classify_record(record_of("give-up", "cause text"), PromptVersion::V2, cfg, cache);
        FAIL("expected BackendUnavailable");
    } catch (const BackendUnavailable& e) {
        CHECK(std::string(e.what()).find("2 attempts") != std::string::npos);
    }
    CHECK(server.hits() == 2);
}

TEST_CASE("remote backend classifies errors without retrying them") {
    EnvGuard key("FAILTAX_API_KEY", "k");

    SUBCASE("401 means bad credentials") {
        MockServer server([&](const httplib::Request&, httplib::Response& res) {
            res.status = 401;
        });
        BackendConfig cfg = remote_config(server.endpoint());
        ResponseCache cache;
        CHECK_THROWS_AS(
            classify_record(record_of("a", "cause"), PromptVersion::V2, cfg, cache),
            InvalidCredential);
        CHECK(server.hits() == 1);
    }

    SUBCASE("other 4xx statuses are hard failures") {
        MockServer server([&](const httplib::Request&, httplib::Response& res) {
            res.status = 404;
            res.set_content("nope", "text/plain");
        });
        BackendConfig cfg = remote_config(server.endpoint());
        ResponseCache cache;
        CHECK_THROWS_AS(
            classify_record(record_of("a", "cause"), PromptVersion::V2, cfg, cache),
            BackendUnavailable);
        CHECK(server.hits() == 1);
    }

    SUBCASE("an unparseable reply is a hard failure") {
        MockServer server([&](const httplib::Request&, httplib::Response& res) {
            res.set_content("not json at all", "application/json");
        });
        BackendConfig cfg = remote_config(server.endpoint());
        ResponseCache cache;
        CHECK_THROWS_AS(
            classify_record(record_of("a", "cause"), PromptVersion::V2, cfg, cache),
            BackendUnavailable);
        CHECK(server.hits() == 1);
    }

    SUBCASE("a reply without choices is a hard failure") {
        MockServer server([&](const httplib::Request&, httplib::Response& res) {
            res.set_content("{\"choices\": []}", "application/json");
        });
        BackendConfig cfg = remote_config(server.endpoint());
        ResponseCache cache;
        CHECK_THROWS_AS(
            classify_record(record_of("a", "cause"), PromptVersion::V2, cfg, cache),
            BackendUnavailable);
    }
}

TEST_CASE("remote backend refuses to start without credentials or endpoint") {
    const std::uint64_t before = llm_request_count();

    SUBCASE("missing key") {
        EnvGuard key("FAILTAX_API_KEY", nullptr);
        BackendConfig cfg = remote_config("http://127.0.0.1:1");
        ResponseCache cache;
        CHECK_THROWS_AS(
            classify_record(record_of("a", "cause"), PromptVersion::V2, cfg, cache),
            InvalidCredential);
    }

    SUBCASE("missing endpoint") {
        EnvGuard key("FAILTAX_API_KEY", "k");
        BackendConfig cfg = remote_config("");
        ResponseCache cache;
        CHECK_THROWS_AS(
            classify_record(record_of("a", "cause"), PromptVersion::V2, cfg, cache),
            BackendUnavailable);
    }

    CHECK(llm_request_count() == before);  // refused before any request
}

TEST_CASE("config validation rejects nonsense") {
    const Dataset ds = oracle_playground(1);
    ResponseCache cache;

    BackendConfig bad_width;
    bad_width.max_in_flight = 0;
    CHECK_THROWS_AS(classify_dataset(ds, PromptVersion::V2, bad_width, cache), Error);

    BackendConfig bad_temp;
    bad_temp.temperature = 3.5;
    CHECK_THROWS_AS(classify_dataset(ds, PromptVersion::V2, bad_temp, cache), Error);
}
