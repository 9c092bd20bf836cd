// Regenerates the bundled fixture datasets under assets/fixtures/. The
// outputs are committed; this tool exists so they can be audited and rebuilt.
//
// Every generated cause is run through keyword_oracle before writing, so the
// fixtures cannot drift from the classifier they are meant to exercise:
//   figures.jsonl  2211 unlabeled records whose oracle labels reproduce the
//                  per-industry bar values exactly
//   gold90.jsonl   90 gold-labeled records on which the oracle gets 68 right
//                  (68/90 = 0.7556, displayed as 76%)

#include <array>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "failtax/classify.hpp"
#include "failtax/ingest.hpp"
#include "failtax/taxonomy.hpp"

using namespace failtax;

namespace {

// Three cause shapes per type. Each shape must trip its own oracle rule and
// none of the earlier ones; generation aborts if any instantiation strays.
const std::array<std::array<const char*, 3>, kFailureTypeCount> kCauseShapes = {{
    // canonical_order position 0: Security Vulnerability
    {"Unpatched vulnerability allowed remote code execution in service %zu.",
     "Attackers exploited a flaw in the login flow of portal %zu.",
     "A ransomware strain encrypted workstations at facility %zu."},
    // Functionality Bug
    {"A software bug caused incorrect totals in module %zu.",
     "The braking logic malfunctioned on vehicle batch %zu.",
     "Faulty rounding in the billing computation overcharged account %zu."},
    // Data Breach
    {"Data breach exposed records of users at site %zu.",
     "A breach of the customer database leaked data for region %zu.",
     "Hackers breached the reservation platform of partner %zu."},
    // Outage
    {"Nationwide outage took down the service %zu.",
     "Extended downtime hit the booking system during window %zu.",
     "A regional outage interrupted card payments at chain %zu."},
    // Integration Issue
    {"Integration with the payment gateway failed for client %zu.",
     "A third-party API change broke the shipping integration for store %zu.",
     "The calendar integration dropped events synced from vendor %zu."},
    // Other
    {"Undisclosed technical issue affected operations at location %zu.",
     "An unexplained glitch halted ticket sales for event %zu.",
     "Company statements gave no cause for the incident at unit %zu."},
    // Performance Issue
    {"Severe latency degraded the checkout flow at peak hours %zu.",
     "Page loads became unbearably slow for storefront %zu.",
     "High latency in the trading feed stalled orders on desk %zu."},
    // UI/UX Bug
    {"UI layout overlapped buttons on the settings screen %zu.",
     "The display rendered garbled characters on terminal %zu.",
     "Misaligned UI elements hid the confirm control in dialog %zu."},
    // Regression Bug
    {"Regression after the latest update broke sign-in for cohort %zu.",
     "A regression in the scheduler delayed dispatch queue %zu.",
     "The firmware incorrectly dated messages after rollout %zu."},
    // Non-Software Cause
    {"Hardware failure, not software, halted kiosks at branch %zu.",
     "Human error during maintenance cut power to rack %zu.",
     "The plugin stopped working due to lack of support on platform %zu."},
}};

struct IndustryFixture {
    const char* name;
    const char* id_prefix;
    // counts in canonical_order
    std::array<std::uint64_t, kFailureTypeCount> counts;
};

const std::vector<IndustryFixture> kFigureFixtures = {
    {"Finance", "fin", {95, 11, 35, 24, 12, 5, 4, 0, 0, 3}},
    {"Healthcare", "hea", {47, 20, 19, 6, 6, 5, 5, 2, 0, 1}},
    {"Information", "inf", {716, 127, 120, 64, 33, 31, 26, 18, 16, 5}},
    {"Knowledge", "kno", {18, 12, 5, 3, 8, 14, 6, 0, 0, 0}},
    {"Transportation", "tra", {80, 187, 4, 16, 57, 52, 9, 6, 4, 2}},
    {"Entertainment", "ent", {60, 33, 24, 4, 9, 6, 15, 4, 0, 0}},
    {"Government", "gov", {64, 11, 18, 2, 7, 9, 2, 3, 1, 0}},
};

// (oracle label, gold label, how many): 68 of the 90 agree.
struct GoldBlock {
    std::size_t predicted;  // canonical index
    std::size_t gold;
    std::size_t count;
};

const std::vector<GoldBlock> kGoldPlan = {
    {0, 0, 26}, {0, 2, 4},            // Security Vulnerability, 4 drift to Data Breach
    {1, 1, 12}, {1, 8, 3},            // Functionality Bug, 3 drift to Regression Bug
    {2, 2, 8},  {2, 0, 2},            // Data Breach
    {3, 3, 6},  {3, 6, 2},            // Outage
    {4, 4, 4},  {4, 1, 2},            // Integration Issue
    {5, 5, 2},  {5, 0, 3}, {5, 9, 1}, // Other
    {6, 6, 3},  {6, 3, 2},            // Performance Issue
    {7, 7, 3},  {7, 1, 1},            // UI/UX Bug
    {8, 8, 2},  {8, 1, 1},            // Regression Bug
    {9, 9, 2},  {9, 5, 1},            // Non-Software Cause
};

std::array<std::size_t, kFailureTypeCount> g_serial{};  // per-type cause numbering

std::string make_cause(std::size_t canonical_idx) {
    const std::size_t serial = ++g_serial[canonical_idx];
    const char* shape = kCauseShapes[canonical_idx][serial % 3];
    char buffer[192];
    std::snprintf(buffer, sizeof(buffer), shape, serial);
    std::string cause = buffer;

    const FailureType want = canonical_order()[canonical_idx];
    const FailureType got = keyword_oracle(cause);
    if (got != want) {
        std::fprintf(stderr, "shape drift: \"%s\" labels as %s, wanted %s\n", cause.c_str(),
                     std::string(display_text(got)).c_str(),
                     std::string(display_text(want)).c_str());
        std::exit(1);
    }
    return cause;
}

// Spreads each type's records evenly through the industry block instead of
// emitting them in runs: record k of a c-count type sits at fraction
// (k + 0.5) / c of the block.
std::vector<std::size_t> interleave(const std::array<std::uint64_t, kFailureTypeCount>& counts) {
    struct Slot {
        double key;
        std::size_t type_idx;
    };
    std::vector<Slot> slots;
    for (std::size_t t = 0; t < kFailureTypeCount; ++t) {
        for (std::uint64_t k = 0; k < counts[t]; ++k) {
            slots.push_back({(static_cast<double>(k) + 0.5) / static_cast<double>(counts[t]), t});
        }
    }
    std::stable_sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
        if (a.key != b.key) {
            return a.key < b.key;
        }
        return a.type_idx < b.type_idx;
    });
    std::vector<std::size_t> order;
    order.reserve(slots.size());
    for (const Slot& slot : slots) {
        order.push_back(slot.type_idx);
    }
    return order;
}

Dataset make_figures() {
    Dataset ds;
    for (const IndustryFixture& fixture : kFigureFixtures) {
        std::size_t serial = 0;
        for (std::size_t type_idx : interleave(fixture.counts)) {
            IncidentRecord record;
            char id[16];
            std::snprintf(id, sizeof(id), "%s-%04zu", fixture.id_prefix, ++serial);
            record.id = id;
            record.cause = make_cause(type_idx);
            record.industry = Industry{fixture.name};
            ds.records.push_back(std::move(record));
        }
    }
    return ds;
}

Dataset make_gold90() {
    std::array<std::uint64_t, kFailureTypeCount> block_counts{};
    for (const GoldBlock& block : kGoldPlan) {
        block_counts[block.predicted] += block.count;
    }

    // Per predicted type, the queue of gold labels to hand out, with misses
    // spread through the hits rather than clustered.
    std::array<std::vector<std::size_t>, kFailureTypeCount> gold_queues;
    std::array<std::size_t, kFailureTypeCount> gold_cursor{};
    for (std::size_t t = 0; t < kFailureTypeCount; ++t) {
        std::array<std::uint64_t, kFailureTypeCount> per_gold{};
        for (const GoldBlock& block : kGoldPlan) {
            if (block.predicted == t) {
                per_gold[block.gold] += block.count;
            }
        }
        gold_queues[t] = interleave(per_gold);
    }

    Dataset ds;
    std::size_t serial = 0;
    std::size_t correct = 0;
    for (std::size_t type_idx : interleave(block_counts)) {
        IncidentRecord record;
        char id[16];
        std::snprintf(id, sizeof(id), "gold-%02zu", ++serial);
        record.id = id;
        record.cause = make_cause(type_idx);
        record.industry =
            Industry{kFigureFixtures[serial % kFigureFixtures.size()].name};
        const std::size_t gold_idx = gold_queues[type_idx][gold_cursor[type_idx]++];
        record.gold_label = canonical_order()[gold_idx];
        if (gold_idx == type_idx) {
            ++correct;
        }
        ds.records.push_back(std::move(record));
    }
    if (ds.records.size() != 90 || correct != 68) {
        std::fprintf(stderr, "gold plan drift: %zu records, %zu correct (wanted 90/68)\n",
                     ds.records.size(), correct);
        std::exit(1);
    }
    return ds;
}

void verify_figures(const Dataset& ds) {
    for (const IndustryFixture& fixture : kFigureFixtures) {
        std::array<std::uint64_t, kFailureTypeCount> tally{};
        for (const IncidentRecord& record : ds.records) {
            if (record.industry == Industry{fixture.name}) {
                ++tally[canonical_index(keyword_oracle(record.cause))];
            }
        }
        if (tally != fixture.counts) {
            std::fprintf(stderr, "count drift in %s\n", fixture.name);
            std::exit(1);
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::string out_dir = "assets/fixtures";
    CLI::App app{"Fixture dataset generator"};
    app.add_option("--out-dir", out_dir, "Destination directory")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    const Dataset figures = make_figures();
    verify_figures(figures);
    const Dataset gold90 = make_gold90();

    std::filesystem::create_directories(out_dir);
    save_dataset_jsonl(figures, std::filesystem::path(out_dir) / "figures.jsonl");
    save_dataset_jsonl(gold90, std::filesystem::path(out_dir) / "gold90.jsonl");
    std::printf("wrote %zu figure records and %zu gold records to %s\n",
                figures.records.size(), gold90.records.size(), out_dir.c_str());
    return 0;
}
