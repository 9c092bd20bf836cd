#include "failtax/evaluate.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "failtax/errors.hpp"

namespace failtax {

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < kFailureTypeCount; ++i) {
        sum += counts[i][i];
    }
    return sum;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t row) const {
    std::uint64_t sum = 0;
    for (std::size_t col = 0; col < kFailureTypeCount; ++col) {
        sum += counts[row][col];
    }
    return sum;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t col) const {
    std::uint64_t sum = 0;
    for (std::size_t row = 0; row < kFailureTypeCount; ++row) {
        sum += counts[row][col];
    }
    return sum;
}

ConfusionMatrix build_confusion(std::span<const GoldPredicted> pairs) {
    if (pairs.empty()) {
        throw EmptyInput();
    }
    ConfusionMatrix cm;
    for (const auto& [gold, predicted] : pairs) {
        ++cm.at(gold, predicted);
    }
    cm.total = pairs.size();
    return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
    if (cm.total == 0) {
        throw EmptyMatrix();
    }
    MetricsReport report;
    report.total = cm.total;
    report.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(cm.total);

    double recall_sum = 0.0;
    std::size_t supported = 0;
    for (std::size_t i = 0; i < kFailureTypeCount; ++i) {
        ClassMetrics& m = report.per_class[i];
        const std::uint64_t diag = cm.counts[i][i];
        const std::uint64_t row = cm.row_sum(i);
        const std::uint64_t col = cm.col_sum(i);
        m.support = row;
        if (row > 0) {
            m.recall = static_cast<double>(diag) / static_cast<double>(row);
            recall_sum += *m.recall;
            ++supported;
        }
        if (col > 0) {
            m.precision = static_cast<double>(diag) / static_cast<double>(col);
        }
    }
    report.macro_accuracy = supported > 0 ? recall_sum / static_cast<double>(supported) : 0.0;
    return report;
}

DeltaGrid diff_matrices(const ConfusionMatrix& a, const ConfusionMatrix& b) {
    DeltaGrid delta{};
    for (std::size_t row = 0; row < kFailureTypeCount; ++row) {
        for (std::size_t col = 0; col < kFailureTypeCount; ++col) {
            delta[row][col] = static_cast<std::int64_t>(b.counts[row][col]) -
                              static_cast<std::int64_t>(a.counts[row][col]);
        }
    }
    return delta;
}

std::string display_percent(double fraction) {
    const long long pct = static_cast<long long>(std::floor(fraction * 100.0 + 0.5));
    return std::to_string(pct) + "%";
}

std::string matrix_to_csv(const ConfusionMatrix& cm) {
    std::string out = "gold\\predicted";
    for (FailureType type : canonical_order()) {
        out += ',';
        out += display_text(type);
    }
    out += '\n';
    for (std::size_t row = 0; row < kFailureTypeCount; ++row) {
        out += display_text(canonical_order()[row]);
        for (std::size_t col = 0; col < kFailureTypeCount; ++col) {
            out += ',';
            out += std::to_string(cm.counts[row][col]);
        }
        out += '\n';
    }
    return out;
}

std::string metrics_to_json(const MetricsReport& report) {
    nlohmann::ordered_json doc;
    doc["total"] = report.total;
    doc["accuracy"] = report.accuracy;
    doc["accuracy_display"] = display_percent(report.accuracy);
    doc["macro_accuracy"] = report.macro_accuracy;
    nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < kFailureTypeCount; ++i) {
        const ClassMetrics& m = report.per_class[i];
        nlohmann::ordered_json entry;
        entry["precision"] = m.precision ? nlohmann::ordered_json(*m.precision)
                                         : nlohmann::ordered_json(nullptr);
        entry["recall"] = m.recall ? nlohmann::ordered_json(*m.recall)
                                   : nlohmann::ordered_json(nullptr);
        entry["support"] = m.support;
        per_class[std::string(display_text(canonical_order()[i]))] = std::move(entry);
    }
    doc["per_class"] = std::move(per_class);
    return doc.dump(2) + "\n";
}

}  // namespace failtax
