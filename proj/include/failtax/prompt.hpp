#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "failtax/taxonomy.hpp"

namespace failtax {

// The three prompt iterations: V0 (general instructions), V1 (closed failure
// list), V2 (failure list plus few-shot examples).
enum class PromptVersion : std::uint8_t { V0, V1, V2 };

std::string_view version_tag(PromptVersion version);  // "v0" / "v1" / "v2"
std::optional<PromptVersion> parse_version_tag(std::string_view tag);

struct FewShotExample {
    std::string cause;
    FailureType label;
};

struct RenderedPrompt {
    PromptVersion version;
    std::string body;
    std::size_t cause_offset;  // byte index where the cause text was inserted
};

// The raw template for a version, with {{cause}} (and for V2 {{examples}})
// placeholders. Byte-identical to the matching file under assets/prompts/.
std::string_view prompt_template_text(PromptVersion version);

// The few-shot pairs shipped with the tool, in the order the prompt prints
// them: Chinook helicopter -> Functionality Bug, Windows Mobile SMS dating ->
// Regression Bug, Adobe Flash on Safari -> Non-Software Cause.
const std::vector<FewShotExample>& bundled_example_bank();

// Loads an extension bank: JSONL lines of {"cause": text, "label": text}.
// Labels must parse exactly; rescue rules do not apply here.
std::vector<FewShotExample> load_example_bank(const std::filesystem::path& path);

// Deterministic, byte-stable instantiation of a template. `examples` is
// ignored for V0/V1; for V2 an empty span falls back to the bundled bank.
// Throws EmptyCause and MissingExamples.
RenderedPrompt render_prompt(PromptVersion version, std::string_view cause,
                             std::span<const FewShotExample> examples = {});

}  // namespace failtax
