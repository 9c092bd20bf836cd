#pragma once

#include <string>
#include <string_view>

namespace failtax {

// ASCII-only helpers; the taxonomy and industry vocabulary are plain ASCII.

std::string_view trim(std::string_view s);

std::string fold_ascii(std::string_view s);

// Case-folded, trimmed comparison used for industry equality.
bool folded_equal(std::string_view a, std::string_view b);

// "Finance Industry" -> "finance-industry". Case-folds, turns whitespace runs
// into single hyphens and any other non [a-z0-9._-] byte into a hyphen so the
// result is always a safe filename component.
std::string slugify(std::string_view s);

// Fixed-point decimal formatting ("%.1f" style); deterministic across runs.
std::string format_fixed(double value, int decimals);

}  // namespace failtax
