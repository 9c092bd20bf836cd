#include "failtax/analytics.hpp"

#include <algorithm>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "failtax/errors.hpp"
#include "failtax/text.hpp"

namespace failtax {

namespace {

struct Group {
    std::array<std::uint64_t, kFailureTypeCount> counts{};
    std::uint64_t total = 0;
    std::size_t first_index = 0;  // lowest input index; decides display spelling
    std::string display;
};

using GroupMap = std::unordered_map<std::string, Group>;

void tally(GroupMap& groups, const IncidentRecord& record,
           const ClassificationResult& result, std::size_t index) {
    if (record.id != result.record_id) {
        throw MismatchedPair(record.id);
    }
    std::string folded = record.industry.folded();
    std::string display{trim(record.industry.name)};
    if (folded.empty()) {
        folded = "unknown";
        display = "Unknown";
    }
    auto [it, inserted] = groups.try_emplace(std::move(folded));
    Group& group = it->second;
    if (inserted || index < group.first_index) {
        group.first_index = index;
        group.display = display;
    }
    ++group.counts[canonical_index(result.label)];
    ++group.total;
}

void merge_into(GroupMap& target, GroupMap& source) {
    for (auto& [key, group] : source) {
        auto [it, inserted] = target.try_emplace(key);
        Group& existing = it->second;
        if (inserted || group.first_index < existing.first_index) {
            existing.first_index = group.first_index;
            existing.display = std::move(group.display);
        }
        for (std::size_t i = 0; i < kFailureTypeCount; ++i) {
            existing.counts[i] += group.counts[i];
        }
        existing.total += group.total;
    }
}

BreakdownSet finalize(GroupMap&& groups) {
    struct Row {
        std::string folded;
        Group group;
    };
    std::vector<Row> rows;
    rows.reserve(groups.size());
    for (auto& [folded, group] : groups) {
        rows.push_back({folded, std::move(group)});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.group.total != b.group.total) {
            return a.group.total > b.group.total;
        }
        return a.folded < b.folded;
    });

    BreakdownSet set;
    set.breakdowns.reserve(rows.size());
    for (Row& row : rows) {
        IndustryBreakdown breakdown;
        breakdown.industry = Industry{std::move(row.group.display)};
        breakdown.counts = row.group.counts;
        breakdown.total = row.group.total;
        set.breakdowns.push_back(std::move(breakdown));
    }
    return set;
}

void check_sizes(std::span<const IncidentRecord> records,
                 std::span<const ClassificationResult> results) {
    if (records.size() != results.size()) {
        throw Error("aggregate: " + std::to_string(records.size()) + " records vs " +
                    std::to_string(results.size()) + " results");
    }
}

}  // namespace

const IndustryBreakdown* BreakdownSet::find(std::string_view industry_name) const {
    for (const IndustryBreakdown& breakdown : breakdowns) {
        if (folded_equal(breakdown.industry.name, industry_name)) {
            return &breakdown;
        }
    }
    return nullptr;
}

BreakdownSet aggregate_serial(std::span<const IncidentRecord> records,
                              std::span<const ClassificationResult> results) {
    check_sizes(records, results);
    GroupMap groups;
    for (std::size_t i = 0; i < records.size(); ++i) {
        tally(groups, records[i], results[i], i);
    }
    return finalize(std::move(groups));
}

BreakdownSet aggregate(std::span<const IncidentRecord> records,
                       std::span<const ClassificationResult> results) {
    check_sizes(records, results);
    const std::size_t n = records.size();
#ifdef _OPENMP
    if (n >= 4096) {
        const int max_threads = omp_get_max_threads();
        std::vector<GroupMap> locals(static_cast<std::size_t>(max_threads));
        std::exception_ptr failure;
#pragma omp parallel num_threads(max_threads)
        {
            const int t = omp_get_thread_num();
            const int team = omp_get_num_threads();
            const std::size_t begin = n * static_cast<std::size_t>(t) /
                                      static_cast<std::size_t>(team);
            const std::size_t end = n * (static_cast<std::size_t>(t) + 1) /
                                    static_cast<std::size_t>(team);
            try {
                GroupMap& local = locals[static_cast<std::size_t>(t)];
                for (std::size_t i = begin; i < end; ++i) {
                    tally(local, records[i], results[i], i);
                }
            } catch (...) {
#pragma omp critical(failtax_aggregate_error)
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
        GroupMap merged;
        for (GroupMap& local : locals) {
            merge_into(merged, local);
        }
        return finalize(std::move(merged));
    }
#endif
    return aggregate_serial(records, results);
}

FailureType dominant_failure(const IndustryBreakdown& breakdown) {
    if (breakdown.total == 0) {
        throw EmptyBreakdown(breakdown.industry.name);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < kFailureTypeCount; ++i) {
        if (breakdown.counts[i] > breakdown.counts[best]) {
            best = i;
        }
    }
    return canonical_order()[best];
}

std::string counts_to_csv(const BreakdownSet& set) {
    auto csv_field = [](std::string_view field) {
        if (field.find_first_of(",\"\n") == std::string_view::npos) {
            return std::string(field);
        }
        std::string quoted = "\"";
        for (char c : field) {
            if (c == '"') {
                quoted += '"';
            }
            quoted += c;
        }
        quoted += '"';
        return quoted;
    };

    std::string out = "industry";
    for (FailureType type : canonical_order()) {
        out += ',';
        out += display_text(type);
    }
    out += ",total\n";
    for (const IndustryBreakdown& breakdown : set.breakdowns) {
        out += csv_field(breakdown.industry.name);
        for (std::uint64_t count : breakdown.counts) {
            out += ',';
            out += std::to_string(count);
        }
        out += ',';
        out += std::to_string(breakdown.total);
        out += '\n';
    }
    return out;
}

}  // namespace failtax
