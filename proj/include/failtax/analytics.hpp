#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "failtax/classify.hpp"
#include "failtax/ingest.hpp"
#include "failtax/taxonomy.hpp"

namespace failtax {

// Per-industry failure-type counts; all ten types are always present, zeros
// included, indexed by canonical_order().
struct IndustryBreakdown {
    Industry industry;
    std::array<std::uint64_t, kFailureTypeCount> counts{};
    std::uint64_t total = 0;

    std::uint64_t count_of(FailureType type) const { return counts[canonical_index(type)]; }
};

// Breakdowns ordered by descending total, ties broken by case-folded name.
struct BreakdownSet {
    std::vector<IndustryBreakdown> breakdowns;

    const IndustryBreakdown* find(std::string_view industry_name) const;
};

// Groups positionally paired (record, result) rows by industry (case-folded
// equality; blank industries land under "Unknown") and counts result labels.
// Throws MismatchedPair when a pair's ids disagree.
BreakdownSet aggregate(std::span<const IncidentRecord> records,
                       std::span<const ClassificationResult> results);

// Single-threaded reference; aggregate must match it exactly.
BreakdownSet aggregate_serial(std::span<const IncidentRecord> records,
                              std::span<const ClassificationResult> results);

// Argmax of the counts; ties go to the earlier canonical_order position.
// Throws EmptyBreakdown when the industry has no records.
FailureType dominant_failure(const IndustryBreakdown& breakdown);

// CSV: industry, the ten canonical display texts in canonical order, total.
std::string counts_to_csv(const BreakdownSet& set);

}  // namespace failtax
