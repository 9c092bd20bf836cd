// Compares the parallel classify/aggregate paths against their serial
// reference implementations on a synthetic dataset: wall time, speedup, and
// an equality check. Not part of the test suite.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "failtax/analytics.hpp"
#include "failtax/classify.hpp"
#include "failtax/ingest.hpp"
#include "failtax/prompt.hpp"

using namespace failtax;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Dataset synthesize(std::size_t count) {
    static const std::vector<std::pair<const char*, const char*>> shapes = {
        {"Unpatched vulnerability allowed remote code execution on host %zu", "Finance"},
        {"A software bug caused incorrect totals in module %zu", "Transportation"},
        {"Data breach exposed records of users at site %zu", "Information"},
        {"Nationwide outage took down the service %zu", "Information"},
        {"Integration with the payment gateway failed for client %zu", "Finance"},
        {"Undisclosed technical issue affected operations at location %zu", "Knowledge"},
        {"Severe latency degraded the checkout flow at peak hours %zu", "Entertainment"},
        {"UI layout overlapped buttons on the settings screen %zu", "Healthcare"},
        {"Regression after the latest update broke sign-in for cohort %zu", "Government"},
        {"Hardware failure, not software, halted kiosks at branch %zu", "Transportation"},
    };
    Dataset ds;
    ds.records.reserve(count);
    char buffer[160];
    for (std::size_t i = 0; i < count; ++i) {
        const auto& [cause_fmt, industry] = shapes[i % shapes.size()];
        std::snprintf(buffer, sizeof(buffer), cause_fmt, i);
        IncidentRecord record;
        record.id = "bench-" + std::to_string(i);
        record.cause = buffer;
        record.industry = Industry{industry};
        ds.records.push_back(std::move(record));
    }
    return ds;
}

bool same_results(const BatchResult& a, const BatchResult& b) {
    return results_to_jsonl(a.results) == results_to_jsonl(b.results);
}

bool same_breakdowns(const BreakdownSet& a, const BreakdownSet& b) {
    return counts_to_csv(a) == counts_to_csv(b);
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t count = 200000;
    int max_in_flight = 8;
    CLI::App app{"Serial vs parallel benchmark"};
    app.add_option("--records", count, "Synthetic record count")->capture_default_str();
    app.add_option("--max-in-flight", max_in_flight, "Parallel width")
        ->check(CLI::Range(2, 256))
        ->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    const Dataset ds = synthesize(count);
    std::printf("dataset: %zu synthetic records\n\n", ds.records.size());

    BackendConfig serial_cfg;
    serial_cfg.max_in_flight = 1;
    BackendConfig parallel_cfg;
    parallel_cfg.max_in_flight = max_in_flight;

    ResponseCache cache_a;
    auto t0 = std::chrono::steady_clock::now();
    const BatchResult serial_batch =
        classify_dataset_serial(ds, PromptVersion::V2, serial_cfg, cache_a);
    const double classify_serial_s = seconds_since(t0);

    ResponseCache cache_b;
    t0 = std::chrono::steady_clock::now();
    const BatchResult parallel_batch =
        classify_dataset(ds, PromptVersion::V2, parallel_cfg, cache_b);
    const double classify_parallel_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const BreakdownSet serial_set = aggregate_serial(ds.records, serial_batch.results);
    const double aggregate_serial_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const BreakdownSet parallel_set = aggregate(ds.records, parallel_batch.results);
    const double aggregate_parallel_s = seconds_since(t0);

    std::printf("%-10s %12s %14s %9s %6s\n", "kernel", "serial (s)", "parallel (s)",
                "speedup", "equal");
    std::printf("%-10s %12.3f %14.3f %8.2fx %6s\n", "classify", classify_serial_s,
                classify_parallel_s, classify_serial_s / classify_parallel_s,
                same_results(serial_batch, parallel_batch) ? "yes" : "NO");
    std::printf("%-10s %12.3f %14.3f %8.2fx %6s\n", "aggregate", aggregate_serial_s,
                aggregate_parallel_s, aggregate_serial_s / aggregate_parallel_s,
                same_breakdowns(serial_set, parallel_set) ? "yes" : "NO");

    const bool ok = same_results(serial_batch, parallel_batch) &&
                    same_breakdowns(serial_set, parallel_set);
    return ok ? 0 : 1;
}
