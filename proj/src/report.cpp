#include "failtax/report.hpp"

#include <algorithm>
#include <cmath>

#include "failtax/text.hpp"

namespace failtax {

namespace {

// Chart geometry, fixed in one place.
constexpr double kWidth = 780.0;
constexpr double kHeight = 460.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 50.0;
constexpr double kMarginBottom = 160.0;  // room for 45-degree tick labels
constexpr double kBarFill = 0.6;         // bar width as a fraction of its slot
constexpr int kTickTarget = 5;

std::string xml_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c; break;
        }
    }
    return out;
}

std::string num(double value) { return format_fixed(value, 2); }

// Smallest integral 1/2/5 * 10^k step whose multiples cover max_value in
// about kTickTarget ticks. max_value of zero still yields a unit axis.
double tick_step(std::uint64_t max_value) {
    if (max_value <= kTickTarget) {
        return 1.0;
    }
    const double rough = static_cast<double>(max_value) / kTickTarget;
    const double magnitude = std::pow(10.0, std::floor(std::log10(rough)));
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (magnitude * mult >= rough) {
            return std::max(1.0, magnitude * mult);
        }
    }
    return std::max(1.0, magnitude * 10.0);
}

}  // namespace

std::string chart_title(std::string_view industry_name) {
    const std::string trimmed{trim(industry_name)};
    if (folded_equal(trimmed, "government")) {
        return "In Government Sector";
    }
    if (folded_equal(trimmed, "healthcare") || folded_equal(trimmed, "health")) {
        return "In Health Industry";
    }
    return "In " + trimmed + " Industry";
}

ChartSpec chart_spec_for(const IndustryBreakdown& breakdown) {
    ChartSpec spec;
    spec.title = chart_title(breakdown.industry.name);
    spec.values = breakdown.counts;
    return spec;
}

std::string chart_file_name(std::string_view industry_name) {
    return slugify(trim(industry_name)) + ".svg";
}

std::string render_chart(const ChartSpec& spec) {
    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const double base_y = kMarginTop + plot_h;
    const double slot = plot_w / kFailureTypeCount;
    const double bar_w = slot * kBarFill;

    const std::uint64_t max_value =
        *std::max_element(spec.values.begin(), spec.values.end());
    const double step = tick_step(max_value);
    const double axis_max =
        step * std::max(1.0, std::ceil(static_cast<double>(max_value) / step));
    const double scale = plot_h / axis_max;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
           "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) +
           " " + num(kHeight) + "\" role=\"img\">\n";
    svg += "  <title>" + xml_escape(spec.title) + "</title>\n";
    svg += "  <style>text { font-family: Helvetica, Arial, sans-serif; fill: "
           "#1a1a1a; }</style>\n";
    svg += "  <rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" +
           num(kHeight) + "\" fill=\"#ffffff\"/>\n";

    svg += "  <text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kMarginTop - 20) +
           "\" font-size=\"18\" text-anchor=\"middle\">" +
           xml_escape(spec.title) + "</text>\n";

    // Horizontal gridlines with y tick values.
    for (double tick = 0.0; tick <= axis_max + step / 2; tick += step) {
        const double y = base_y - tick * scale;
        svg += "  <line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(y) +
               "\" x2=\"" + num(kMarginLeft + plot_w) + "\" y2=\"" + num(y) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "  <text x=\"" + num(kMarginLeft - 8) + "\" y=\"" + num(y + 4) +
               "\" font-size=\"11\" text-anchor=\"end\">" +
               std::to_string(static_cast<std::uint64_t>(std::llround(tick))) +
               "</text>\n";
    }

    const auto& order = canonical_order();
    for (std::size_t i = 0; i < kFailureTypeCount; ++i) {
        const double cx = kMarginLeft + slot * (static_cast<double>(i) + 0.5);
        const double height = static_cast<double>(spec.values[i]) * scale;
        const double top = base_y - height;
        svg += "  <rect x=\"" + num(cx - bar_w / 2) + "\" y=\"" + num(top) +
               "\" width=\"" + num(bar_w) + "\" height=\"" + num(height) +
               "\" fill=\"#4878a8\"/>\n";
        svg += "  <text x=\"" + num(cx) + "\" y=\"" + num(top - 5) +
               "\" font-size=\"12\" text-anchor=\"middle\">" +
               std::to_string(spec.values[i]) + "</text>\n";
        const double label_y = base_y + 14;
        svg += "  <text x=\"" + num(cx) + "\" y=\"" + num(label_y) +
               "\" font-size=\"11\" text-anchor=\"end\" transform=\"rotate(-45 " +
               num(cx) + " " + num(label_y) + ")\">" +
               xml_escape(display_text(order[i])) + "</text>\n";
    }

    // Axis lines on top of the bars.
    svg += "  <line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kMarginTop) +
           "\" x2=\"" + num(kMarginLeft) + "\" y2=\"" + num(base_y) +
           "\" stroke=\"#1a1a1a\" stroke-width=\"1\"/>\n";
    svg += "  <line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(base_y) +
           "\" x2=\"" + num(kMarginLeft + plot_w) + "\" y2=\"" + num(base_y) +
           "\" stroke=\"#1a1a1a\" stroke-width=\"1\"/>\n";

    svg += "  <text x=\"" + num(kMarginLeft + plot_w / 2) + "\" y=\"" +
           num(kHeight - 15) + "\" font-size=\"14\" text-anchor=\"middle\">" +
           xml_escape(spec.x_label) + "</text>\n";
    const double ylab_x = 20.0;
    const double ylab_y = kMarginTop + plot_h / 2;
    svg += "  <text x=\"" + num(ylab_x) + "\" y=\"" + num(ylab_y) +
           "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 " +
           num(ylab_x) + " " + num(ylab_y) + ")\">" + xml_escape(spec.y_label) +
           "</text>\n";
    svg += "</svg>\n";
    return svg;
}

std::string render_markdown_report(const BreakdownSet& breakdowns,
                                   const MetricsReport* metrics,
                                   const ConfusionMatrix* matrix) {
    std::string out = "# Failure Breakdown Report\n";

    if (breakdowns.breakdowns.empty()) {
        out += "\nNo data.\n";
    }

    const auto& order = canonical_order();
    for (const IndustryBreakdown& breakdown : breakdowns.breakdowns) {
        out += "\n## " + breakdown.industry.name + "\n\n";
        out += "| Failure Type | Count | Share |\n";
        out += "| --- | ---: | ---: |\n";
        for (std::size_t i = 0; i < kFailureTypeCount; ++i) {
            const std::uint64_t count = breakdown.counts[i];
            const double share =
                breakdown.total == 0
                    ? 0.0
                    : 100.0 * static_cast<double>(count) /
                          static_cast<double>(breakdown.total);
            out += "| " + std::string(display_text(order[i])) + " | " +
                   std::to_string(count) + " | " + format_fixed(share, 1) +
                   "% |\n";
        }
        if (breakdown.total > 0) {
            const FailureType dominant = dominant_failure(breakdown);
            out += "\nDominant failure: " +
                   std::string(display_text(dominant)) + " (" +
                   std::to_string(breakdown.count_of(dominant)) + " of " +
                   std::to_string(breakdown.total) + ").\n";
        }
    }

    if (metrics != nullptr) {
        out += "\n## Evaluation\n\n";
        out += "Overall accuracy: " + display_percent(metrics->accuracy) + "\n";
        out += "\nMacro accuracy: " + display_percent(metrics->macro_accuracy) +
               "\n";
        if (matrix != nullptr) {
            out += "\n| Gold \\ Predicted |";
            for (FailureType type : order) {
                out += " " + std::string(display_text(type)) + " |";
            }
            out += "\n| --- |";
            for (std::size_t i = 0; i < kFailureTypeCount; ++i) {
                out += " ---: |";
            }
            out += "\n";
            for (FailureType gold : order) {
                out += "| " + std::string(display_text(gold)) + " |";
                for (FailureType predicted : order) {
                    out += " " + std::to_string(matrix->at(gold, predicted)) +
                           " |";
                }
                out += "\n";
            }
        }
    }

    return out;
}

}  // namespace failtax
