#include "failtax/ingest.hpp"

#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "failtax/errors.hpp"
#include "failtax/io_util.hpp"
#include "failtax/text.hpp"

namespace failtax {

namespace {

using ordered_json = nlohmann::ordered_json;

void check_and_append(Dataset& ds, IncidentRecord record, std::size_t line_no,
                      std::unordered_set<std::string>& seen_ids) {
    if (record.id.empty()) {
        throw MalformedRecord(line_no, "id is empty");
    }
    if (trim(record.cause).empty()) {
        throw MalformedRecord(line_no, "cause is empty");
    }
    if (!seen_ids.insert(record.id).second) {
        throw DuplicateId(record.id);
    }
    ds.records.push_back(std::move(record));
}

std::optional<FailureType> parse_gold(const std::string& id, const std::string& raw) {
    if (trim(raw).empty()) {
        return std::nullopt;
    }
    const auto label = parse_exact_label(raw);
    if (!label) {
        throw InvalidGoldLabel(id, raw);
    }
    return label;
}

// Minimal RFC-4180 reader: quoted fields may contain commas, doubled quotes
// and newlines. Returns false at end of input.
bool read_csv_row(std::istream& in, std::vector<std::string>& fields,
                  std::size_t& line_no) {
    fields.clear();
    int c = in.get();
    if (c == EOF) {
        return false;
    }
    ++line_no;
    std::string field;
    bool quoted = false;
    while (true) {
        if (c == EOF) {
            fields.push_back(std::move(field));
            return true;
        }
        char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                int next = in.get();
                if (next == '"') {
                    field.push_back('"');
                } else {
                    quoted = false;
                    c = next;
                    continue;
                }
            } else {
                if (ch == '\n') {
                    ++line_no;
                }
                field.push_back(ch);
            }
        } else if (ch == '"' && field.empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            if (!field.empty() && field.back() == '\r') {
                field.pop_back();
            }
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(ch);
        }
        c = in.get();
    }
}

}  // namespace

DatasetFormat format_for_path(const std::filesystem::path& path) {
    return fold_ascii(path.extension().string()) == ".csv" ? DatasetFormat::Csv
                                                           : DatasetFormat::Jsonl;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure(path.string(), "cannot open dataset");
    }
    return format == DatasetFormat::Jsonl ? parse_jsonl_dataset(in, path.string())
                                          : parse_csv_dataset(in, path.string());
}

Dataset parse_jsonl_dataset(std::istream& in, std::string source_path) {
    Dataset ds;
    ds.source_path = std::move(source_path);
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        ordered_json doc;
        try {
            doc = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw MalformedRecord(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!doc.is_object()) {
            throw MalformedRecord(line_no, "expected a JSON object");
        }
        for (const char* key : {"id", "cause", "industry"}) {
            if (!doc.contains(key)) {
                throw MalformedRecord(line_no, std::string("missing field '") + key + "'");
            }
            if (!doc[key].is_string()) {
                throw MalformedRecord(line_no, std::string("field '") + key + "' must be a string");
            }
        }

        IncidentRecord record;
        record.id = doc["id"].get<std::string>();
        record.cause = doc["cause"].get<std::string>();
        record.industry = Industry{doc["industry"].get<std::string>()};
        if (doc.contains("gold_label") && !doc["gold_label"].is_null()) {
            if (!doc["gold_label"].is_string()) {
                throw MalformedRecord(line_no, "field 'gold_label' must be a string");
            }
            record.gold_label = parse_gold(record.id, doc["gold_label"].get<std::string>());
        }
        for (auto& [key, value] : doc.items()) {
            if (key == "id" || key == "cause" || key == "industry" || key == "gold_label") {
                continue;
            }
            record.extra[key] = value;
        }
        check_and_append(ds, std::move(record), line_no, seen_ids);
    }
    return ds;
}

Dataset parse_csv_dataset(std::istream& in, std::string source_path) {
    Dataset ds;
    ds.source_path = std::move(source_path);
    std::unordered_set<std::string> seen_ids;

    std::vector<std::string> fields;
    std::size_t line_no = 0;
    if (!read_csv_row(in, fields, line_no)) {
        return ds;  // empty file, empty dataset
    }
    const std::vector<std::string> expected = {"id", "cause", "industry", "gold_label"};
    if (fields.size() != expected.size()) {
        throw MalformedRecord(1, "header must be id,cause,industry,gold_label");
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (std::string(trim(fields[i])) != expected[i]) {
            throw MalformedRecord(1, "header must be id,cause,industry,gold_label");
        }
    }

    while (read_csv_row(in, fields, line_no)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) {
            continue;  // trailing blank line
        }
        const std::size_t row_line = line_no;
        if (fields.size() != 4) {
            throw MalformedRecord(row_line, "expected 4 fields, got " +
                                                std::to_string(fields.size()));
        }
        IncidentRecord record;
        record.id = fields[0];
        record.cause = fields[1];
        record.industry = Industry{fields[2]};
        record.gold_label = parse_gold(record.id, fields[3]);
        check_and_append(ds, std::move(record), row_line, seen_ids);
    }
    return ds;
}

std::string dataset_to_jsonl(const Dataset& ds) {
    std::string out;
    for (const IncidentRecord& record : ds.records) {
        ordered_json doc = ordered_json::object();
        doc["id"] = record.id;
        doc["cause"] = record.cause;
        doc["industry"] = record.industry.name;
        if (record.gold_label) {
            doc["gold_label"] = std::string(display_text(*record.gold_label));
        }
        for (auto& [key, value] : record.extra.items()) {
            doc[key] = value;
        }
        out += doc.dump();
        out += '\n';
    }
    return out;
}

void save_dataset_jsonl(const Dataset& ds, const std::filesystem::path& path) {
    write_file_atomic(path, dataset_to_jsonl(ds));
}

ValidationReport validate_dataset(const Dataset& ds) {
    ValidationReport report;
    report.total = ds.records.size();

    // folded name -> display spelling of first occurrence
    std::unordered_map<std::string, std::string> display_names;
    std::map<std::string, std::size_t> folded_counts;
    std::size_t blank_industries = 0;
    for (const IncidentRecord& record : ds.records) {
        std::string folded = record.industry.folded();
        std::string display{trim(record.industry.name)};
        if (folded.empty()) {
            folded = "unknown";
            display = "Unknown";
            ++blank_industries;
        }
        display_names.emplace(folded, display);
        ++folded_counts[folded];
        if (record.gold_label) {
            ++report.gold_count;
        }
    }
    for (const auto& [folded, count] : folded_counts) {
        report.industry_counts[display_names[folded]] = count;
    }

    if (blank_industries > 0) {
        report.warnings.push_back(std::to_string(blank_industries) +
                                  " record(s) with blank industry grouped as 'Unknown'");
    }
    if (report.gold_count > 0 && report.gold_count < report.total) {
        report.warnings.push_back("gold labels cover " + std::to_string(report.gold_count) +
                                  " of " + std::to_string(report.total) + " records");
    }
    return report;
}

}  // namespace failtax
