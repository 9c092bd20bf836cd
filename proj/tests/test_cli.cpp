#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "failtax/classify.hpp"
#include "failtax/prompt.hpp"
#include "failtax/taxonomy.hpp"
#include "test_util.hpp"

using namespace failtax;
namespace fs = std::filesystem;

namespace {

std::string cli_path() { return FAILTAX_CLI_PATH; }

std::string gold90_path() {
    return (testutil::assets_dir() / "fixtures/gold90.jsonl").string();
}

// Three records with unambiguous keyword labels.
const char* kTinyJsonl =
    "{\"id\": \"t1\", \"cause\": \"Nationwide outage took down the booking site.\", "
    "\"industry\": \"Finance\"}\n"
    "{\"id\": \"t2\", \"cause\": \"A breach of the customer database leaked data.\", "
    "\"industry\": \"Finance\"}\n"
    "{\"id\": \"t3\", \"cause\": \"Checkout pages became painfully slow.\", "
    "\"industry\": \"Retail\"}\n";

std::map<std::string, std::string> snapshot_tree(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file()) {
            files[fs::relative(entry.path(), dir).string()] =
                testutil::slurp(entry.path());
        }
    }
    return files;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
    testutil::TempDir tmp;
    CHECK(testutil::run_process(cli_path(), "", tmp.path()).exit_code == 2);
    CHECK(testutil::run_process(cli_path(), "classify --no-such-flag", tmp.path()).exit_code ==
          2);
    CHECK(testutil::run_process(cli_path(), "classify", tmp.path()).exit_code == 2);

    SUBCASE("help exits 0") {
        const auto run = testutil::run_process(cli_path(), "--help", tmp.path());
        CHECK(run.exit_code == 0);
        CHECK(run.out.find("classify") != std::string::npos);
    }
}

TEST_CASE("runtime errors exit 1 with a failtax prefix") {
    testutil::TempDir tmp;
    const auto run = testutil::run_process(
        cli_path(),
        "classify --input " + testutil::quoted(tmp / "absent.jsonl") + " --out-dir " +
            testutil::quoted(tmp / "out"),
        tmp.path());
    CHECK(run.exit_code == 1);
    CHECK(run.err.find("failtax: ") != std::string::npos);
}

TEST_CASE("classify labels a small dataset with the oracle") {
    testutil::TempDir tmp;
    testutil::spit(tmp / "tiny.jsonl", kTinyJsonl);

    const auto run = testutil::run_process(
        cli_path(),
        "classify --input " + testutil::quoted(tmp / "tiny.jsonl") + " --out-dir " +
            testutil::quoted(tmp / "out") + " --backend oracle",
        tmp.path());
    CHECK(run.exit_code == 0);
    CHECK(run.out.find("classified 3 (non-canonical 0, failed 0)") != std::string::npos);

    const auto results = load_results_jsonl(tmp / "out" / "results.jsonl");
    REQUIRE(results.size() == 3);
    CHECK(results[0].label == FailureType::Outage);
    CHECK(results[1].label == FailureType::DataBreach);
    CHECK(results[2].label == FailureType::PerformanceIssue);
    CHECK(results[0].backend_kind == "keyword-oracle");
}

TEST_CASE("classify accepts csv input") {
    testutil::TempDir tmp;
    testutil::spit(tmp / "tiny.csv",
                   "id,cause,industry,gold_label\n"
                   "c1,\"Nationwide outage, again.\",Finance,Outage\n"
                   "c2,Data breach exposed records.,Finance,\n");

    const auto run = testutil::run_process(
        cli_path(),
        "classify --input " + testutil::quoted(tmp / "tiny.csv") + " --out-dir " +
            testutil::quoted(tmp / "out"),
        tmp.path());
    CHECK(run.exit_code == 0);
    CHECK(run.out.find("classified 2") != std::string::npos);

    const auto results = load_results_jsonl(tmp / "out" / "results.jsonl");
    REQUIRE(results.size() == 2);
    CHECK(results[0].label == FailureType::Outage);
    CHECK(results[1].label == FailureType::DataBreach);
}

TEST_CASE("classify on the gold set reports ninety records") {
    testutil::TempDir tmp;
    const auto run = testutil::run_process(
        cli_path(),
        "classify --input '" + gold90_path() + "' --out-dir " + testutil::quoted(tmp / "out"),
        tmp.path());
    CHECK(run.exit_code == 0);
    CHECK(run.out.find("classified 90") != std::string::npos);
}

TEST_CASE("replay with a cold cache fails and names the missing records") {
    testutil::TempDir tmp;
    testutil::spit(tmp / "tiny.jsonl", kTinyJsonl);

    const auto run = testutil::run_process(
        cli_path(),
        "classify --input " + testutil::quoted(tmp / "tiny.jsonl") + " --out-dir " +
            testutil::quoted(tmp / "out") + " --backend replay --cache " +
            testutil::quoted(tmp / "cache.jsonl"),
        tmp.path());
    CHECK(run.exit_code == 1);
    CHECK(run.err.find("replay cache miss for record 't1'") != std::string::npos);
    CHECK(run.err.find("'t2'") != std::string::npos);
    CHECK(run.err.find("'t3'") != std::string::npos);
}

TEST_CASE("replay serves answers from a cache warmed out of band") {
    testutil::TempDir tmp;
    testutil::spit(tmp / "tiny.jsonl", kTinyJsonl);

    // Keys must line up with the CLI defaults: prompt v2, bundled examples,
    // gpt-3.5-turbo at temperature zero.
    BackendConfig replay;
    replay.kind = BackendKind::Replay;
    ResponseCache cache;
    const std::pair<const char*, const char*> replies[] = {
        {"Nationwide outage took down the booking site.", "Outage"},
        {"A breach of the customer database leaked data.", "The label is Data Breach"},
        {"Checkout pages became painfully slow.", "Performance Issue"},
    };
    for (const auto& [cause, reply] : replies) {
        cache.insert(cache_key(replay, PromptVersion::V2, render_prompt(PromptVersion::V2, cause).body),
                     reply);
    }
    cache.save(tmp / "cache.jsonl");

    const auto run = testutil::run_process(
        cli_path(),
        "classify --input " + testutil::quoted(tmp / "tiny.jsonl") + " --out-dir " +
            testutil::quoted(tmp / "out") + " --backend replay --cache " +
            testutil::quoted(tmp / "cache.jsonl"),
        tmp.path());
    CHECK(run.exit_code == 0);
    CHECK(run.out.find("classified 3 (non-canonical 1, failed 0)") != std::string::npos);

    const auto results = load_results_jsonl(tmp / "out" / "results.jsonl");
    REQUIRE(results.size() == 3);
    CHECK(results[0].label == FailureType::Outage);
    CHECK(results[1].label == FailureType::DataBreach);
    CHECK(results[1].non_canonical);
    CHECK(results[2].label == FailureType::PerformanceIssue);
    CHECK(results[0].backend_kind == "replay");
    CHECK(results[0].cached);
}

TEST_CASE("pipeline produces every artifact for the gold set") {
    testutil::TempDir tmp;
    const fs::path out = tmp / "out";
    const auto run = testutil::run_process(
        cli_path(),
        "pipeline --input '" + gold90_path() + "' --out-dir " + testutil::quoted(out),
        tmp.path());
    REQUIRE_MESSAGE(run.exit_code == 0, run.err);

    for (const char* name :
         {"results.jsonl", "matrix.csv", "metrics.json", "counts.csv", "report.md"}) {
        CHECK_MESSAGE(fs::exists(out / name), name);
    }
    const char* charts[] = {"entertainment.svg", "finance.svg",   "government.svg",
                            "healthcare.svg",    "information.svg", "knowledge.svg",
                            "transportation.svg"};
    for (const char* chart : charts) {
        CHECK_MESSAGE(fs::exists(out / chart), chart);
    }

    CHECK(run.out.find("Overall accuracy: 76% (68 of 90)") != std::string::npos);
    CHECK(testutil::slurp(out / "metrics.json").find("\"76%\"") != std::string::npos);
    CHECK(testutil::slurp(out / "report.md").find("Overall accuracy: 76%") !=
          std::string::npos);
    CHECK(testutil::slurp(out / "healthcare.svg").find("In Health Industry") !=
          std::string::npos);

    // No leftover temp files from the atomic writes.
    for (const auto& entry : fs::directory_iterator(out)) {
        CHECK(entry.path().filename().string().find(".tmp") == std::string::npos);
    }

    SUBCASE("a rerun is byte-identical") {
        const auto before = snapshot_tree(out);
        const auto rerun = testutil::run_process(
            cli_path(),
            "pipeline --input '" + gold90_path() + "' --out-dir " + testutil::quoted(out),
            tmp.path());
        REQUIRE(rerun.exit_code == 0);
        CHECK(snapshot_tree(out) == before);
    }
}

TEST_CASE("pipeline without gold labels skips the evaluation artifacts") {
    testutil::TempDir tmp;
    testutil::spit(tmp / "tiny.jsonl", kTinyJsonl);
    const fs::path out = tmp / "out";
    const auto run = testutil::run_process(
        cli_path(),
        "pipeline --input " + testutil::quoted(tmp / "tiny.jsonl") + " --out-dir " +
            testutil::quoted(out),
        tmp.path());
    REQUIRE_MESSAGE(run.exit_code == 0, run.err);

    CHECK(!fs::exists(out / "matrix.csv"));
    CHECK(!fs::exists(out / "metrics.json"));
    CHECK(fs::exists(out / "results.jsonl"));
    CHECK(fs::exists(out / "counts.csv"));
    CHECK(fs::exists(out / "report.md"));
    CHECK(fs::exists(out / "finance.svg"));
    CHECK(fs::exists(out / "retail.svg"));
    CHECK(testutil::slurp(out / "report.md").find("## Evaluation") == std::string::npos);
}

TEST_CASE("evaluate, aggregate and report run standalone on saved results") {
    testutil::TempDir tmp;
    const fs::path out = tmp / "out";
    const std::string dataset_args =
        " --input '" + gold90_path() + "' --out-dir " + testutil::quoted(out);

    REQUIRE(testutil::run_process(cli_path(), "classify" + dataset_args, tmp.path())
                .exit_code == 0);

    const auto evaluate = testutil::run_process(cli_path(), "evaluate" + dataset_args,
                                                tmp.path());
    CHECK(evaluate.exit_code == 0);
    CHECK(evaluate.out.find("Overall accuracy: 76% (68 of 90)") != std::string::npos);
    CHECK(fs::exists(out / "matrix.csv"));
    CHECK(fs::exists(out / "metrics.json"));

    const auto aggregate = testutil::run_process(cli_path(), "aggregate" + dataset_args,
                                                 tmp.path());
    CHECK(aggregate.exit_code == 0);
    CHECK(aggregate.out.find("aggregated 90 results across 7 industries") !=
          std::string::npos);
    CHECK(fs::exists(out / "counts.csv"));

    const auto report = testutil::run_process(cli_path(), "report" + dataset_args, tmp.path());
    CHECK(report.exit_code == 0);
    CHECK(report.out.find("wrote report.md and 7 charts") != std::string::npos);
    CHECK(fs::exists(out / "report.md"));
    CHECK(fs::exists(out / "transportation.svg"));

    SUBCASE("stale results referencing unknown records are rejected") {
        testutil::spit(tmp / "one.jsonl",
                       "{\"id\": \"only\", \"cause\": \"outage\", \"industry\": \"x\"}\n");
        const auto stale = testutil::run_process(
            cli_path(),
            "evaluate --input " + testutil::quoted(tmp / "one.jsonl") + " --out-dir " +
                testutil::quoted(out) + " --results " +
                testutil::quoted(out / "results.jsonl"),
            tmp.path());
        CHECK(stale.exit_code == 1);
        CHECK(stale.err.find("unknown record id") != std::string::npos);
    }
}

TEST_CASE("a config file can stand in for flags") {
    testutil::TempDir tmp;
    testutil::spit(tmp / "tiny.jsonl", kTinyJsonl);
    testutil::spit(tmp / "failtax.toml",
                   "[classify]\n"
                   "input = \"" + (tmp / "tiny.jsonl").string() + "\"\n"
                   "out-dir = \"" + (tmp / "out").string() + "\"\n"
                   "backend = \"oracle\"\n");

    SUBCASE("named alongside the subcommand") {
        const auto run = testutil::run_process(
            cli_path(), "--config " + testutil::quoted(tmp / "failtax.toml") + " classify",
            tmp.path());
        CHECK(run.exit_code == 0);
        CHECK(fs::exists(tmp / "out" / "results.jsonl"));
    }

    SUBCASE("the section alone selects the subcommand") {
        const auto run = testutil::run_process(
            cli_path(), "--config " + testutil::quoted(tmp / "failtax.toml"), tmp.path());
        CHECK(run.exit_code == 0);
        CHECK(run.out.find("classified 3") != std::string::npos);
    }

    SUBCASE("flags override the config") {
        const auto run = testutil::run_process(
            cli_path(),
            "--config " + testutil::quoted(tmp / "failtax.toml") + " classify --out-dir " +
                testutil::quoted(tmp / "other"),
            tmp.path());
        CHECK(run.exit_code == 0);
        CHECK(fs::exists(tmp / "other" / "results.jsonl"));
    }
}
