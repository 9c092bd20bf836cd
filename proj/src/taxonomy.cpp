#include "failtax/taxonomy.hpp"

#include "failtax/text.hpp"

namespace failtax {

namespace {

constexpr std::array<std::string_view, kFailureTypeCount> kDisplayTexts = {
    "Data Breach",
    "Functionality Bug",
    "UI/UX Bug",
    "Regression Bug",
    "Outage",
    "Security Vulnerability",
    "Performance Issue",
    "Integration Issue",
    "Non-Software Cause",
    "Other",
};

// Trim whitespace plus trailing sentence punctuation ('.' and '!').
std::string_view strip_label_noise(std::string_view raw) {
    std::string_view s = trim(raw);
    while (!s.empty()) {
        char back = s.back();
        if (back == '.' || back == '!') {
            s.remove_suffix(1);
            s = trim(s);
            continue;
        }
        break;
    }
    return s;
}

bool exact_match(const std::string& folded, FailureType type) {
    if (folded == fold_ascii(display_text(type))) {
        return true;
    }
    // Backends frequently swap the UI/UX separator for '-' or ' '.
    if (type == FailureType::UiUxBug) {
        return folded == "ui-ux bug" || folded == "ui ux bug";
    }
    return false;
}

bool substring_match(const std::string& folded_text, FailureType type) {
    if (folded_text.find(fold_ascii(display_text(type))) != std::string::npos) {
        return true;
    }
    if (type == FailureType::UiUxBug) {
        return folded_text.find("ui-ux bug") != std::string::npos ||
               folded_text.find("ui ux bug") != std::string::npos;
    }
    return false;
}

}  // namespace

std::string_view display_text(FailureType type) {
    return kDisplayTexts[static_cast<std::size_t>(type)];
}

const std::array<FailureType, kFailureTypeCount>& taxonomy_order() {
    static const std::array<FailureType, kFailureTypeCount> order = {
        FailureType::DataBreach,       FailureType::FunctionalityBug,
        FailureType::UiUxBug,          FailureType::RegressionBug,
        FailureType::Outage,           FailureType::SecurityVulnerability,
        FailureType::PerformanceIssue, FailureType::IntegrationIssue,
        FailureType::NonSoftwareCause, FailureType::Other,
    };
    return order;
}

const std::array<FailureType, kFailureTypeCount>& canonical_order() {
    static const std::array<FailureType, kFailureTypeCount> order = {
        FailureType::SecurityVulnerability, FailureType::FunctionalityBug,
        FailureType::DataBreach,            FailureType::Outage,
        FailureType::IntegrationIssue,      FailureType::Other,
        FailureType::PerformanceIssue,      FailureType::UiUxBug,
        FailureType::RegressionBug,         FailureType::NonSoftwareCause,
    };
    return order;
}

std::size_t canonical_index(FailureType type) {
    const auto& order = canonical_order();
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] == type) {
            return i;
        }
    }
    return order.size();  // unreachable for valid enum values
}

NormalizedLabel normalize_label(std::string_view raw) {
    const std::string folded = fold_ascii(strip_label_noise(raw));

    for (FailureType type : taxonomy_order()) {
        if (exact_match(folded, type)) {
            return {type, LabelMatch::Exact};
        }
    }

    std::optional<FailureType> hit;
    std::size_t distinct = 0;
    for (FailureType type : taxonomy_order()) {
        if (substring_match(folded, type)) {
            hit = type;
            ++distinct;
        }
    }
    if (distinct == 1) {
        return {*hit, LabelMatch::Substring};
    }
    return {FailureType::Other, LabelMatch::Fallback};
}

std::optional<FailureType> parse_exact_label(std::string_view raw) {
    const std::string folded = fold_ascii(strip_label_noise(raw));
    for (FailureType type : taxonomy_order()) {
        if (exact_match(folded, type)) {
            return type;
        }
    }
    return std::nullopt;
}

std::string Industry::folded() const {
    return fold_ascii(trim(name));
}

bool Industry::operator==(const Industry& other) const {
    return folded() == other.folded();
}

}  // namespace failtax
