#include "failtax/prompt.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "failtax/errors.hpp"
#include "failtax/text.hpp"

namespace failtax {

namespace {

// Embedded copies of assets/prompts/*.txt; a golden test pins byte equality.
constexpr std::string_view kTemplateV0 =
    R"tmpl(You are an AI trained to identify the type of software failure based on the Cause provided. Use the context in the cause to determine the type of software failure

Cause: {{cause}}
)tmpl";

constexpr std::string_view kTemplateV1 =
    R"tmpl(You are an AI trained to identify the type of software failure based on the Cause provided. Use the context in the cause to determine the type of software failure from the following list:

- Data Breach
- Functionality Bug
- UI/UX Bug
- Regression Bug
- Outage
- Security Vulnerability
- Performance Issue
- Integration Issue
- Non-Software Cause
- Other

Your task is to read the cause below and determine the type of software failure from the given list. Only return the type of failure without any additional text or explanation. If the cause does not fit any category in the list, return "Other".

Cause: {{cause}}
)tmpl";

// The closing sentence of the second iteration drops the final period; kept
// as published.
constexpr std::string_view kTemplateV2 =
    R"tmpl(You are an AI trained to identify the type of software failure based on the Cause provided. Use the context in the cause to determine the type of software failure from the following list:

- Data Breach
- Functionality Bug
- UI/UX Bug
- Regression Bug
- Outage
- Security Vulnerability
- Performance Issue
- Integration Issue
- Non-Software Cause
- Other

Your task is to read the cause below and determine the type of software failure from the given list. Only return the type of failure without any additional text or explanation. If the cause does not fit any category in the list, return "Other"

Examples:

{{examples}}

Cause: {{cause}}
)tmpl";

constexpr std::string_view kCauseMarker = "{{cause}}";
constexpr std::string_view kExamplesMarker = "{{examples}}";

std::string render_examples_block(std::span<const FewShotExample> bank) {
    std::string out;
    for (std::size_t i = 0; i < bank.size(); ++i) {
        if (i > 0) {
            out += "\n\n";
        }
        out += "Cause: ";
        out += bank[i].cause;
        out += '\n';
        out += display_text(bank[i].label);
    }
    return out;
}

}  // namespace

std::string_view version_tag(PromptVersion version) {
    switch (version) {
        case PromptVersion::V0: return "v0";
        case PromptVersion::V1: return "v1";
        case PromptVersion::V2: return "v2";
    }
    return "v2";
}

std::optional<PromptVersion> parse_version_tag(std::string_view tag) {
    const std::string folded = fold_ascii(trim(tag));
    if (folded == "v0") return PromptVersion::V0;
    if (folded == "v1") return PromptVersion::V1;
    if (folded == "v2") return PromptVersion::V2;
    return std::nullopt;
}

std::string_view prompt_template_text(PromptVersion version) {
    switch (version) {
        case PromptVersion::V0: return kTemplateV0;
        case PromptVersion::V1: return kTemplateV1;
        case PromptVersion::V2: return kTemplateV2;
    }
    return kTemplateV2;
}

const std::vector<FewShotExample>& bundled_example_bank() {
    static const std::vector<FewShotExample> bank = {
        {"The faulty computer software in the Chinook helicopter was described as "
         "\"positively dangerous\" and had deficiencies that meant the pilot's full "
         "control of the engines \"could not be assured\".",
         FailureType::FunctionalityBug},
        {"Software bug causing Windows Mobile devices to incorrectly date incoming "
         "SMS messages to 2016.",
         FailureType::RegressionBug},
        {"Lack of Adobe Flash support on Apple's Safari browser for iPad, iPhone, "
         "and iPod Touch devices.",
         FailureType::NonSoftwareCause},
    };
    return bank;
}

std::vector<FewShotExample> load_example_bank(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoFailure(path.string(), "cannot open example bank");
    }
    std::vector<FewShotExample> bank;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw MalformedRecord(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!doc.is_object() || !doc.contains("cause") || !doc["cause"].is_string() ||
            !doc.contains("label") || !doc["label"].is_string()) {
            throw MalformedRecord(line_no, "expected {\"cause\": text, \"label\": text}");
        }
        std::string cause = doc["cause"].get<std::string>();
        if (trim(cause).empty()) {
            throw MalformedRecord(line_no, "cause is empty");
        }
        const std::string raw_label = doc["label"].get<std::string>();
        const auto label = parse_exact_label(raw_label);
        if (!label) {
            throw MalformedRecord(line_no, "label '" + raw_label + "' is not canonical");
        }
        bank.push_back({std::move(cause), *label});
    }
    return bank;
}

RenderedPrompt render_prompt(PromptVersion version, std::string_view cause,
                             std::span<const FewShotExample> examples) {
    if (trim(cause).empty()) {
        throw EmptyCause();
    }

    std::string body{prompt_template_text(version)};

    if (version == PromptVersion::V2) {
        std::span<const FewShotExample> bank =
            examples.empty() ? std::span<const FewShotExample>(bundled_example_bank())
                             : examples;
        if (bank.empty()) {
            throw MissingExamples();
        }
        const std::size_t at = body.find(kExamplesMarker);
        body.replace(at, kExamplesMarker.size(), render_examples_block(bank));
    }

    const std::size_t cause_offset = body.find(kCauseMarker);
    body.replace(cause_offset, kCauseMarker.size(), cause);

    return {version, std::move(body), cause_offset};
}

}  // namespace failtax
