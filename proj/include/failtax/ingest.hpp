#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "failtax/taxonomy.hpp"

namespace failtax {

// One software-failure report as extracted by the upstream collection
// pipeline. `extra` carries unknown JSONL fields so a load/save round trip
// loses nothing.
struct IncidentRecord {
    std::string id;
    std::string cause;
    Industry industry;
    std::optional<FailureType> gold_label;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};

struct Dataset {
    std::vector<IncidentRecord> records;  // source order preserved
    std::string source_path;
};

enum class DatasetFormat { Jsonl, Csv };

// Picks CSV for a ".csv" suffix, JSONL otherwise.
DatasetFormat format_for_path(const std::filesystem::path& path);

// Throws MalformedRecord, DuplicateId, InvalidGoldLabel, IoFailure. Gold
// labels are accepted on exact-match rules only; substring rescue never
// applies to gold data.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

Dataset parse_jsonl_dataset(std::istream& in, std::string source_path);
Dataset parse_csv_dataset(std::istream& in, std::string source_path);

std::string dataset_to_jsonl(const Dataset& ds);
void save_dataset_jsonl(const Dataset& ds, const std::filesystem::path& path);

struct ValidationReport {
    std::size_t total = 0;
    // case-preserving display name (first spelling seen) -> record count
    std::map<std::string, std::size_t> industry_counts;
    std::size_t gold_count = 0;
    std::vector<std::string> warnings;
};

ValidationReport validate_dataset(const Dataset& ds);

}  // namespace failtax
