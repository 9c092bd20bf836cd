#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace failtax {

// The closed ten-type failure taxonomy. Display texts are the canonical
// on-disk and wire representation everywhere (CSV, JSONL, chart labels).
enum class FailureType : std::uint8_t {
    DataBreach,
    FunctionalityBug,
    UiUxBug,
    RegressionBug,
    Outage,
    SecurityVulnerability,
    PerformanceIssue,
    IntegrationIssue,
    NonSoftwareCause,
    Other,
};

inline constexpr std::size_t kFailureTypeCount = 10;

std::string_view display_text(FailureType type);

// All ten variants in the order the classification prompt lists them
// (Data Breach first, Other last).
const std::array<FailureType, kFailureTypeCount>& taxonomy_order();

// All ten variants in the fixed x-axis order shared by every chart and
// table: Security Vulnerability, Functionality Bug, Data Breach, Outage,
// Integration Issue, Other, Performance Issue, UI/UX Bug, Regression Bug,
// Non-Software Cause.
const std::array<FailureType, kFailureTypeCount>& canonical_order();

// Position of `type` within canonical_order().
std::size_t canonical_index(FailureType type);

enum class LabelMatch : std::uint8_t {
    Exact,      // trimmed, case-insensitive match of a canonical text
    Substring,  // rescued from prose containing exactly one canonical text
    Fallback,   // nothing (or more than one thing) matched; mapped to Other
};

struct NormalizedLabel {
    FailureType type;
    LabelMatch match;

    bool non_canonical() const { return match != LabelMatch::Exact; }
};

// Maps arbitrary backend reply text onto the closed taxonomy. Total: never
// fails, always returns one of the ten variants.
//
// Matching order:
//   1. trim whitespace and trailing '.'/'!'
//   2. case-insensitive exact match ("UI/UX Bug" also accepted with '-' or
//      ' ' as the separator)
//   3. unique-substring rescue over the canonical texts, for replies like
//      "The failure type is: Outage"
//   4. zero or multiple substring hits degrade to Other with the fallback
//      flag set
NormalizedLabel normalize_label(std::string_view raw);

// Strict parse used for gold labels and example banks: steps 1-2 only, no
// substring rescue. A label that fails this is a data bug, not a rescue case.
std::optional<FailureType> parse_exact_label(std::string_view raw);

// Industry names form an open vocabulary. Equality is case-folded and
// whitespace-trimmed; the original spelling is preserved for display.
struct Industry {
    std::string name;

    std::string folded() const;
    bool operator==(const Industry& other) const;
};

}  // namespace failtax
