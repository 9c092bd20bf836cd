// Command-line front end: classify, evaluate, aggregate, report, pipeline.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "failtax/analytics.hpp"
#include "failtax/classify.hpp"
#include "failtax/errors.hpp"
#include "failtax/evaluate.hpp"
#include "failtax/ingest.hpp"
#include "failtax/io_util.hpp"
#include "failtax/prompt.hpp"
#include "failtax/report.hpp"
#include "failtax/taxonomy.hpp"

namespace fs = std::filesystem;
using namespace failtax;

namespace {

struct Options {
    std::string input;
    std::string out_dir;
    std::string format;  // empty: infer from the input path
    std::string prompt_version = "v2";
    std::string backend = "oracle";
    std::string endpoint;
    std::string model = "gpt-3.5-turbo";
    double temperature = 0.0;
    int max_in_flight = 4;
    std::string cache_path;
    std::string examples_path;
    std::string results_path;  // empty: <out-dir>/results.jsonl
};

void add_dataset_options(CLI::App* cmd, Options& opt) {
    cmd->add_option("--input", opt.input, "Dataset file (JSONL or CSV)")
        ->required();
    cmd->add_option("--out-dir", opt.out_dir, "Output directory")->required();
    cmd->add_option("--format", opt.format, "Input format (default: by file suffix)")
        ->check(CLI::IsMember({"jsonl", "csv"}));
}

void add_backend_options(CLI::App* cmd, Options& opt) {
    cmd->add_option("--prompt-version", opt.prompt_version, "Prompt template version")
        ->check(CLI::IsMember({"v0", "v1", "v2"}))
        ->capture_default_str();
    cmd->add_option("--backend", opt.backend, "Classification backend")
        ->check(CLI::IsMember({"llm", "remote-llm", "oracle", "keyword-oracle", "replay"}))
        ->capture_default_str();
    cmd->add_option("--endpoint", opt.endpoint, "Chat-completions endpoint (llm backend)");
    cmd->add_option("--model", opt.model, "Model name sent to the endpoint")
        ->capture_default_str();
    cmd->add_option("--temperature", opt.temperature, "Sampling temperature")
        ->capture_default_str();
    cmd->add_option("--max-in-flight", opt.max_in_flight, "Concurrent backend calls")
        ->check(CLI::Range(1, 256))
        ->capture_default_str();
    cmd->add_option("--cache", opt.cache_path, "Response cache file (JSONL)");
    cmd->add_option("--examples", opt.examples_path,
                    "Few-shot extension bank (JSONL) appended to the bundled examples");
}

void add_results_option(CLI::App* cmd, Options& opt) {
    cmd->add_option("--results", opt.results_path,
                    "Classification results file (default: <out-dir>/results.jsonl)");
}

DatasetFormat resolve_format(const Options& opt) {
    if (opt.format == "jsonl") {
        return DatasetFormat::Jsonl;
    }
    if (opt.format == "csv") {
        return DatasetFormat::Csv;
    }
    return format_for_path(opt.input);
}

BackendConfig resolve_backend(const Options& opt) {
    BackendConfig backend;
    backend.kind = *parse_backend_kind(opt.backend);  // choices pre-checked
    backend.endpoint = opt.endpoint;
    backend.model = opt.model;
    backend.temperature = opt.temperature;
    backend.max_in_flight = opt.max_in_flight;
    return backend;
}

std::vector<FewShotExample> resolve_examples(const Options& opt) {
    if (opt.examples_path.empty()) {
        return {};  // render_prompt falls back to the bundled bank
    }
    std::vector<FewShotExample> bank = bundled_example_bank();
    for (FewShotExample& ex : load_example_bank(opt.examples_path)) {
        bank.push_back(std::move(ex));
    }
    return bank;
}

fs::path resolve_results_path(const Options& opt) {
    if (!opt.results_path.empty()) {
        return opt.results_path;
    }
    return fs::path(opt.out_dir) / "results.jsonl";
}

void print_warnings(const ValidationReport& report) {
    for (const std::string& warning : report.warnings) {
        std::fprintf(stderr, "warning: %s\n", warning.c_str());
    }
}

// Pairs results back to their records by id, in results order. Catches stale
// results files referencing records the dataset no longer has.
std::vector<IncidentRecord> pair_records(const Dataset& ds,
                                         const std::vector<ClassificationResult>& results) {
    std::unordered_map<std::string_view, const IncidentRecord*> by_id;
    by_id.reserve(ds.records.size());
    for (const IncidentRecord& record : ds.records) {
        by_id.emplace(record.id, &record);
    }
    std::vector<IncidentRecord> paired;
    paired.reserve(results.size());
    for (const ClassificationResult& result : results) {
        auto it = by_id.find(result.record_id);
        if (it == by_id.end()) {
            throw Error("result references unknown record id '" + result.record_id + "'");
        }
        paired.push_back(*it->second);
    }
    return paired;
}

std::vector<GoldPredicted> gold_pairs(const std::vector<IncidentRecord>& records,
                                      const std::vector<ClassificationResult>& results) {
    std::vector<GoldPredicted> pairs;
    pairs.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].gold_label) {
            pairs.push_back({*records[i].gold_label, results[i].label});
        }
    }
    return pairs;
}

// Runs a batch and writes results.jsonl plus the refreshed cache. Returns the
// batch for downstream stages.
BatchResult run_classify(const Options& opt, const Dataset& ds) {
    const BackendConfig backend = resolve_backend(opt);
    const PromptVersion version = *parse_version_tag(opt.prompt_version);
    const std::vector<FewShotExample> examples = resolve_examples(opt);

    ResponseCache cache = opt.cache_path.empty()
                              ? ResponseCache{}
                              : ResponseCache{fs::path(opt.cache_path)};
    BatchResult batch = classify_dataset(ds, version, backend, cache, examples);

    fs::create_directories(opt.out_dir);
    write_file_atomic(fs::path(opt.out_dir) / "results.jsonl",
                      results_to_jsonl(batch.results));
    if (!opt.cache_path.empty() && cache.dirty()) {
        cache.save(opt.cache_path);
    }

    for (const RecordFailure& failure : batch.failures) {
        std::fprintf(stderr, "record '%s' failed: %s\n", failure.record_id.c_str(),
                     failure.message.c_str());
    }
    std::printf("classified %zu (non-canonical %zu, failed %zu)\n",
                batch.results.size(), batch.non_canonical_count(),
                batch.failures.size());
    return batch;
}

// Writes matrix.csv and metrics.json from the gold-labeled subset.
void run_evaluate(const Options& opt, const std::vector<IncidentRecord>& records,
                  const std::vector<ClassificationResult>& results) {
    const std::vector<GoldPredicted> pairs = gold_pairs(records, results);
    if (pairs.size() < results.size()) {
        std::fprintf(stderr, "warning: %zu of %zu results lack gold labels\n",
                     results.size() - pairs.size(), results.size());
    }
    const ConfusionMatrix matrix = build_confusion(pairs);
    const MetricsReport metrics = compute_metrics(matrix);

    fs::create_directories(opt.out_dir);
    write_file_atomic(fs::path(opt.out_dir) / "matrix.csv", matrix_to_csv(matrix));
    write_file_atomic(fs::path(opt.out_dir) / "metrics.json", metrics_to_json(metrics));
    std::printf("Overall accuracy: %s (%llu of %llu)\n",
                display_percent(metrics.accuracy).c_str(),
                static_cast<unsigned long long>(matrix.trace()),
                static_cast<unsigned long long>(matrix.total));
}

// Writes counts.csv.
BreakdownSet run_aggregate(const Options& opt, const std::vector<IncidentRecord>& records,
                           const std::vector<ClassificationResult>& results) {
    BreakdownSet breakdowns = aggregate(records, results);
    fs::create_directories(opt.out_dir);
    write_file_atomic(fs::path(opt.out_dir) / "counts.csv", counts_to_csv(breakdowns));
    std::printf("aggregated %zu results across %zu industries\n", results.size(),
                breakdowns.breakdowns.size());
    return breakdowns;
}

// Writes report.md and one SVG per industry.
void run_report(const Options& opt, const BreakdownSet& breakdowns,
                const MetricsReport* metrics, const ConfusionMatrix* matrix) {
    fs::create_directories(opt.out_dir);
    write_file_atomic(fs::path(opt.out_dir) / "report.md",
                      render_markdown_report(breakdowns, metrics, matrix));
    for (const IndustryBreakdown& breakdown : breakdowns.breakdowns) {
        write_file_atomic(fs::path(opt.out_dir) / chart_file_name(breakdown.industry.name),
                          render_chart(chart_spec_for(breakdown)));
    }
    std::printf("wrote report.md and %zu charts\n", breakdowns.breakdowns.size());
}

int cmd_classify(const Options& opt) {
    const Dataset ds = load_dataset(opt.input, resolve_format(opt));
    print_warnings(validate_dataset(ds));
    run_classify(opt, ds);
    return 0;
}

int cmd_evaluate(const Options& opt) {
    const Dataset ds = load_dataset(opt.input, resolve_format(opt));
    const std::vector<ClassificationResult> results =
        load_results_jsonl(resolve_results_path(opt));
    const std::vector<IncidentRecord> records = pair_records(ds, results);
    run_evaluate(opt, records, results);
    return 0;
}

int cmd_aggregate(const Options& opt) {
    const Dataset ds = load_dataset(opt.input, resolve_format(opt));
    const std::vector<ClassificationResult> results =
        load_results_jsonl(resolve_results_path(opt));
    const std::vector<IncidentRecord> records = pair_records(ds, results);
    run_aggregate(opt, records, results);
    return 0;
}

int cmd_report(const Options& opt) {
    const Dataset ds = load_dataset(opt.input, resolve_format(opt));
    const std::vector<ClassificationResult> results =
        load_results_jsonl(resolve_results_path(opt));
    const std::vector<IncidentRecord> records = pair_records(ds, results);

    const BreakdownSet breakdowns = aggregate(records, results);
    const std::vector<GoldPredicted> pairs = gold_pairs(records, results);
    if (pairs.empty()) {
        run_report(opt, breakdowns, nullptr, nullptr);
    } else {
        const ConfusionMatrix matrix = build_confusion(pairs);
        const MetricsReport metrics = compute_metrics(matrix);
        run_report(opt, breakdowns, &metrics, &matrix);
    }
    return 0;
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(std::string(name) + ": " + e.what());
    }
}

int cmd_pipeline(const Options& opt) {
    const Dataset ds = stage("load", [&] { return load_dataset(opt.input, resolve_format(opt)); });
    print_warnings(validate_dataset(ds));

    const BatchResult batch = stage("classify", [&] { return run_classify(opt, ds); });
    const std::vector<IncidentRecord> records =
        stage("classify", [&] { return pair_records(ds, batch.results); });

    const std::vector<GoldPredicted> pairs = gold_pairs(records, batch.results);
    std::optional<MetricsReport> metrics;
    std::optional<ConfusionMatrix> matrix;
    if (!pairs.empty()) {
        stage("evaluate", [&] {
            run_evaluate(opt, records, batch.results);
            matrix = build_confusion(pairs);
            metrics = compute_metrics(*matrix);
            return 0;
        });
    }

    const BreakdownSet breakdowns =
        stage("aggregate", [&] { return run_aggregate(opt, records, batch.results); });
    stage("report", [&] {
        run_report(opt, breakdowns, metrics ? &*metrics : nullptr,
                   matrix ? &*matrix : nullptr);
        return 0;
    });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Software-failure taxonomy classification and analytics"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key/value config file (TOML-style)");

    Options opt;
    CLI::App* classify = app.add_subcommand("classify", "Label every record in a dataset");
    classify->configurable();  // reads the [classify] config section
    add_dataset_options(classify, opt);
    add_backend_options(classify, opt);

    CLI::App* evaluate = app.add_subcommand("evaluate", "Score results against gold labels");
    evaluate->configurable();
    add_dataset_options(evaluate, opt);
    add_results_option(evaluate, opt);

    CLI::App* aggregate = app.add_subcommand("aggregate", "Count failure types per industry");
    aggregate->configurable();
    add_dataset_options(aggregate, opt);
    add_results_option(aggregate, opt);

    CLI::App* report = app.add_subcommand("report", "Render tables and charts");
    report->configurable();
    add_dataset_options(report, opt);
    add_results_option(report, opt);

    CLI::App* pipeline = app.add_subcommand("pipeline", "Classify, evaluate, aggregate, report");
    pipeline->configurable();
    add_dataset_options(pipeline, opt);
    add_backend_options(pipeline, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (classify->parsed()) {
            return cmd_classify(opt);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(opt);
        }
        if (aggregate->parsed()) {
            return cmd_aggregate(opt);
        }
        if (report->parsed()) {
            return cmd_report(opt);
        }
        return cmd_pipeline(opt);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "failtax: %s\n", e.what());
        return 1;
    }
}
