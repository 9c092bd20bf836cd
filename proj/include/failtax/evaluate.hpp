#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "failtax/taxonomy.hpp"

namespace failtax {

// Gold-vs-predicted counts, both axes indexed by canonical_order().
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, kFailureTypeCount>, kFailureTypeCount> counts{};
    std::uint64_t total = 0;

    std::uint64_t& at(FailureType gold, FailureType predicted) {
        return counts[canonical_index(gold)][canonical_index(predicted)];
    }
    std::uint64_t at(FailureType gold, FailureType predicted) const {
        return counts[canonical_index(gold)][canonical_index(predicted)];
    }
    std::uint64_t trace() const;
    std::uint64_t row_sum(std::size_t row) const;
    std::uint64_t col_sum(std::size_t col) const;
};

using GoldPredicted = std::pair<FailureType, FailureType>;

// Throws EmptyInput on an empty pair list.
ConfusionMatrix build_confusion(std::span<const GoldPredicted> pairs);

struct ClassMetrics {
    std::optional<double> precision;  // diag / column sum; absent when the
                                      // class was never predicted
    std::optional<double> recall;     // diag / row sum; absent when support 0
    std::uint64_t support = 0;
};

struct MetricsReport {
    double accuracy = 0.0;        // micro: trace / total
    double macro_accuracy = 0.0;  // mean per-class recall over supported classes
    std::array<ClassMetrics, kFailureTypeCount> per_class{};  // canonical order
    std::uint64_t total = 0;
};

// Throws EmptyMatrix when the matrix holds no pairs.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

// Signed cell-wise difference b - a, for comparing prompt iterations.
using DeltaGrid = std::array<std::array<std::int64_t, kFailureTypeCount>, kFailureTypeCount>;
DeltaGrid diff_matrices(const ConfusionMatrix& a, const ConfusionMatrix& b);

// Fraction rendered as a half-up-rounded integer percentage: 0.7556 -> "76%".
std::string display_percent(double fraction);

// CSV with a gold-label header column and predicted-label header row, both in
// canonical order.
std::string matrix_to_csv(const ConfusionMatrix& cm);

// JSON document mirroring MetricsReport; undefined precision/recall serialize
// as null, never 0.
std::string metrics_to_json(const MetricsReport& report);

}  // namespace failtax
