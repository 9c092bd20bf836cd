#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "failtax/analytics.hpp"
#include "failtax/evaluate.hpp"
#include "failtax/taxonomy.hpp"

namespace failtax {

// One bar per failure type, values indexed in canonical order.
struct ChartSpec {
    std::string title;
    std::string x_label = "Failure Type";
    std::string y_label = "Number of failures";
    std::array<std::uint64_t, kFailureTypeCount> values{};
};

// "In Finance Industry" style figure title; Government gets "Sector",
// Healthcare is shortened to Health.
std::string chart_title(std::string_view industry_name);

ChartSpec chart_spec_for(const IndustryBreakdown& breakdown);

// Self-contained SVG document. Byte-identical output for identical specs.
std::string render_chart(const ChartSpec& spec);

// Case-folded, hyphenated file name: "Healthcare" -> "healthcare.svg".
std::string chart_file_name(std::string_view industry_name);

// One table per industry plus a dominant-failure line; optional evaluation
// section with accuracy lines and the confusion matrix. Empty input renders
// a "No data." body.
std::string render_markdown_report(const BreakdownSet& breakdowns,
                                   const MetricsReport* metrics = nullptr,
                                   const ConfusionMatrix* matrix = nullptr);

}  // namespace failtax
