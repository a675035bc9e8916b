#pragma once

// Text tables and self-contained SVG charts for experiment results.
// Every number is printed with fixed precision so output bytes depend only
// on the input rows.

#include <bpdhar/experiments.hpp>
#include <bpdhar/labels.hpp>
#include <bpdhar/text.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace bpdhar {

namespace report {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;  // sorted by x
    bool dashed = false;
};

struct Marker {
    double x;
    double y;
    std::string label;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    std::vector<Marker> markers;
};

struct F1Chart {
    ClassifierKind classifier;
    LineChart chart;
};

inline constexpr std::array<std::string_view, 10> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
};

inline std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

namespace detail {

inline std::string num(double v) { return text::format_fixed(v, 2); }

inline std::string svg_open(int w, int h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
           std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
           "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline std::string text_at(double x, double y, std::string_view s, std::string_view anchor = "start",
                           std::string_view extra = "") {
    std::string out = "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + std::string(anchor) + "\"";
    if (!extra.empty()) out += " " + std::string(extra);
    return out + ">" + escape_xml(s) + "</text>\n";
}

inline std::string line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0) {
    return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
           "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) + "\"/>\n";
}

// White to dark blue.
inline std::string heat_colour(double v) {
    v = std::clamp(v, 0.0, 1.0);
    const auto ch = [&](double lo, double hi) { return std::to_string(static_cast<int>(std::lround(lo + (hi - lo) * v))); };
    return "rgb(" + ch(255, 8) + "," + ch(255, 48) + "," + ch(255, 107) + ")";
}

}  // namespace detail

/// F1-vs-k charts, one per classifier: one k-means series per segment length,
/// one time-based series, and a marker on both ends of every matched point.
inline std::vector<F1Chart> f1_charts(std::span<const CellSummary> cells, const MatchedPointsResult& matched) {
    std::map<ClassifierKind, std::map<std::pair<Strategy, int>, Series>> by_kind;
    for (const auto& c : cells) {
        auto& s = by_kind[c.classifier][{c.strategy, c.segment_min}];
        if (s.name.empty()) {
            s.name = c.strategy == Strategy::kmeans ? "kmeans " + std::to_string(c.segment_min) + " min" : "time_based";
            s.dashed = c.strategy == Strategy::time_based;
        }
        s.points.emplace_back(c.k, c.mean_f1);
    }
    std::vector<F1Chart> out;
    for (auto& [kind, series] : by_kind) {
        F1Chart f{kind, {}};
        f.chart.title = "Mean macro-F1 vs. number of BPDs (" + std::string(name_of(kind)) + ")";
        f.chart.x_label = "k";
        f.chart.y_label = "F1";
        for (auto& [key, s] : series) {
            std::sort(s.points.begin(), s.points.end());
            f.chart.series.push_back(std::move(s));
        }
        for (const auto& p : matched.points) {
            if (p.classifier != kind) continue;
            f.chart.markers.push_back({static_cast<double>(p.k), p.f1_kmeans_mean, "k=" + std::to_string(p.k)});
            f.chart.markers.push_back({static_cast<double>(p.k), p.f1_time_mean, ""});
        }
        out.push_back(std::move(f));
    }
    return out;
}

inline std::string render_line_chart(const LineChart& chart) {
    constexpr int W = 760, H = 420, left = 60, right = 200, top = 40, bottom = 50;
    constexpr double pw = W - left - right, ph = H - top - bottom;
    double xmin = 0, xmax = 0;
    bool first = true;
    for (const auto& s : chart.series)
        for (const auto& [x, y] : s.points) {
            xmin = first ? x : std::min(xmin, x);
            xmax = first ? x : std::max(xmax, x);
            first = false;
        }
    if (first || xmax - xmin < 1.0) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    const auto py = [&](double y) { return top + (1.0 - std::clamp(y, 0.0, 1.0)) * ph; };

    std::string svg = detail::svg_open(W, H);
    svg += detail::text_at(W / 2.0, 22, chart.title, "middle", "font-size=\"14\"");
    for (int i = 0; i <= 5; ++i) {
        const double y = i / 5.0;
        svg += detail::line(left, py(y), left + pw, py(y), "#e0e0e0");
        svg += detail::text_at(left - 6, py(y) + 4, text::format_fixed(y, 1), "end");
    }
    const double span = xmax - xmin;
    const int step = span <= 20 ? 1 : span <= 50 ? 5 : 10;
    for (int x = static_cast<int>(std::ceil(xmin)); x <= static_cast<int>(std::floor(xmax)); ++x) {
        if (x % step != 0 && step != 1) continue;
        svg += detail::line(px(x), top + ph, px(x), top + ph + 4, "#333");
        svg += detail::text_at(px(x), top + ph + 17, std::to_string(x), "middle");
    }
    svg += detail::line(left, top, left, top + ph, "#333");
    svg += detail::line(left, top + ph, left + pw, top + ph, "#333");
    svg += detail::text_at(left + pw / 2, H - 12, chart.x_label, "middle");
    svg += detail::text_at(16, top + ph / 2, chart.y_label, "middle",
                           "transform=\"rotate(-90 16 " + detail::num(top + ph / 2) + ")\"");

    for (std::size_t i = 0; i < chart.series.size(); ++i) {
        const auto& s = chart.series[i];
        const auto colour = std::string(kPalette[i % kPalette.size()]);
        std::string pts;
        for (const auto& [x, y] : s.points) {
            if (!pts.empty()) pts += ' ';
            pts += detail::num(px(x)) + "," + detail::num(py(y));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"2\"";
        if (s.dashed) svg += " stroke-dasharray=\"6 4\"";
        svg += " points=\"" + pts + "\"/>\n";
        for (const auto& [x, y] : s.points)
            svg += "<circle cx=\"" + detail::num(px(x)) + "\" cy=\"" + detail::num(py(y)) + "\" r=\"2.5\" fill=\"" +
                   colour + "\"/>\n";
        const double ly = top + 10 + 18.0 * static_cast<double>(i);
        svg += detail::line(left + pw + 15, ly, left + pw + 40, ly, colour, 2);
        svg += detail::text_at(left + pw + 46, ly + 4, s.name);
    }
    for (const auto& m : chart.markers) {
        svg += "<circle cx=\"" + detail::num(px(m.x)) + "\" cy=\"" + detail::num(py(m.y)) +
               "\" r=\"6\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
        if (!m.label.empty()) svg += detail::text_at(px(m.x) + 8, py(m.y) - 8, m.label);
    }
    if (!chart.markers.empty()) {
        const double ly = top + 10 + 18.0 * static_cast<double>(chart.series.size());
        svg += "<circle cx=\"" + detail::num(left + pw + 27) + "\" cy=\"" + detail::num(ly) +
               "\" r=\"6\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
        svg += detail::text_at(left + pw + 46, ly + 4, "matched point");
    }
    return svg + "</svg>\n";
}

/// Row-normalised confusion matrix heat map (rows: true label).
inline std::string render_confusion_heatmap(const ConfusionMatrix& m, std::string_view title) {
    constexpr int cell = 56, left = 150, top = 60;
    constexpr int W = left + cell * static_cast<int>(kLabelCount) + 30;
    constexpr int H = top + cell * static_cast<int>(kLabelCount) + 130;
    std::string svg = detail::svg_open(W, H);
    svg += detail::text_at(W / 2.0, 24, title, "middle", "font-size=\"14\"");
    for (std::size_t t = 0; t < kLabelCount; ++t) {
        std::size_t row_total = 0;
        for (auto v : m[t]) row_total += v;
        const double y = top + cell * static_cast<double>(t);
        svg += detail::text_at(left - 8, y + cell / 2.0 + 4, kLabelNames[t], "end");
        for (std::size_t p = 0; p < kLabelCount; ++p) {
            const double x = left + cell * static_cast<double>(p);
            const bool empty = row_total == 0;
            const double v = empty ? 0.0 : static_cast<double>(m[t][p]) / static_cast<double>(row_total);
            svg += "<rect x=\"" + detail::num(x) + "\" y=\"" + detail::num(y) + "\" width=\"" + std::to_string(cell) +
                   "\" height=\"" + std::to_string(cell) + "\" fill=\"" + (empty ? std::string("#f0f0f0") : detail::heat_colour(v)) +
                   "\" stroke=\"white\"/>\n";
            svg += detail::text_at(x + cell / 2.0, y + cell / 2.0 + 4, empty ? "n/a" : detail::num(v), "middle",
                                   v > 0.5 ? "fill=\"white\"" : "fill=\"black\"");
        }
    }
    for (std::size_t p = 0; p < kLabelCount; ++p) {
        const double x = left + cell * (static_cast<double>(p) + 0.5);
        const double y = top + cell * static_cast<double>(kLabelCount) + 10;
        svg += detail::text_at(x, y, kLabelNames[p], "end",
                               "transform=\"rotate(-45 " + detail::num(x) + " " + detail::num(y) + ")\"");
    }
    svg += detail::text_at(left + cell * kLabelCount / 2.0, H - 10, "predicted", "middle");
    return svg + "</svg>\n";
}

/// Stacked bar per subject of the annotation label fractions.
inline std::string render_annotation_distribution(const std::map<std::string, LabelCounts>& counts) {
    constexpr int bar = 44, gap = 16, left = 60, top = 40, ph = 300, legend = 170;
    const int W = left + static_cast<int>(counts.size()) * (bar + gap) + legend;
    const int H = top + ph + 60;
    std::string svg = detail::svg_open(W, H);
    svg += detail::text_at(W / 2.0, 22, "Annotation distribution per subject", "middle", "font-size=\"14\"");
    for (int i = 0; i <= 5; ++i) {
        const double y = top + ph * (1.0 - i / 5.0);
        svg += detail::line(left - 4, y, left, y, "#333");
        svg += detail::text_at(left - 6, y + 4, text::format_fixed(i / 5.0, 1), "end");
    }
    svg += detail::line(left, top, left, top + ph, "#333");
    int col = 0;
    for (const auto& [subject, c] : counts) {
        std::size_t total = 0;
        for (auto v : c) total += v;
        const double x = left + gap / 2.0 + col * (bar + gap);
        double acc = 0.0;
        for (std::size_t l = 0; l < kLabelCount && total > 0; ++l) {
            const double f = static_cast<double>(c[l]) / static_cast<double>(total);
            if (f <= 0.0) continue;
            svg += "<rect x=\"" + detail::num(x) + "\" y=\"" + detail::num(top + ph * (1.0 - acc - f)) +
                   "\" width=\"" + std::to_string(bar) + "\" height=\"" + detail::num(ph * f) + "\" fill=\"" +
                   std::string(kPalette[l]) + "\"/>\n";
            acc += f;
        }
        svg += detail::text_at(x + bar / 2.0, top + ph + 18, subject, "middle");
        ++col;
    }
    const double lx = left + static_cast<double>(counts.size()) * (bar + gap) + 20;
    for (std::size_t l = 0; l < kLabelCount; ++l) {
        const double ly = top + 18.0 * static_cast<double>(l);
        svg += "<rect x=\"" + detail::num(lx) + "\" y=\"" + detail::num(ly) + "\" width=\"12\" height=\"12\" fill=\"" +
               std::string(kPalette[l]) + "\"/>\n";
        svg += detail::text_at(lx + 18, ly + 10, kLabelNames[l]);
    }
    return svg + "</svg>\n";
}

// ---------------------------------------------------------------------------
// Confusion cell selection

struct CellId {
    Strategy strategy;
    int k;
    int segment_min;
    ClassifierKind classifier;
    double mean_f1;
};

/// Picks the cell to render: the best mean macro-F1 among cells matching the
/// given fields (k-means only when no strategy is given and k-means rows
/// exist). Ties go to the first cell in canonical order.
inline std::optional<CellId> select_cell(std::span<const CellSummary> cells, std::optional<Strategy> strategy,
                                         std::optional<int> k, std::optional<int> segment_min,
                                         std::optional<ClassifierKind> classifier) {
    if (!strategy && std::any_of(cells.begin(), cells.end(), [](const auto& c) { return c.strategy == Strategy::kmeans; }))
        strategy = Strategy::kmeans;
    std::optional<CellId> best;
    for (const auto& c : cells) {
        if ((strategy && c.strategy != *strategy) || (k && c.k != *k) || (segment_min && c.segment_min != *segment_min) ||
            (classifier && c.classifier != *classifier))
            continue;
        if (!best || c.mean_f1 > best->mean_f1) best = CellId{c.strategy, c.k, c.segment_min, c.classifier, c.mean_f1};
    }
    return best;
}

/// Sum of the confusion matrices of every row in the cell.
inline ConfusionMatrix cell_confusion(std::span<const ExperimentResult> results, const CellId& id) {
    ConfusionMatrix m{};
    for (const auto& r : results) {
        if (r.strategy != id.strategy || r.k != id.k || r.segment_min != id.segment_min || r.classifier != id.classifier)
            continue;
        for (std::size_t t = 0; t < kLabelCount; ++t)
            for (std::size_t p = 0; p < kLabelCount; ++p) m[t][p] += r.confusion[t][p];
    }
    return m;
}

inline std::string describe(const CellId& id) {
    return std::string(name_of(id.strategy)) + " k=" + std::to_string(id.k) +
           (id.strategy == Strategy::kmeans ? " segment=" + std::to_string(id.segment_min) + " min" : "") + " " +
           std::string(name_of(id.classifier));
}

// ---------------------------------------------------------------------------
// Tables

/// Plain-text table of mean F1 per cell followed by the matched points.
inline void write_text_report(std::ostream& out, std::span<const CellSummary> cells, const MatchedPointsResult& matched) {
    out << "Mean macro-F1 (repetitions averaged per subject, then subjects)\n\n";
    out << "strategy    k    segment  classifier   mean_f1\n";
    for (const auto& c : cells) {
        std::string line = std::string(name_of(c.strategy));
        line.resize(12, ' ');
        std::string k = std::to_string(c.k);
        k.resize(5, ' ');
        std::string seg = std::to_string(c.segment_min);
        seg.resize(9, ' ');
        std::string kind(name_of(c.classifier));
        kind.resize(13, ' ');
        out << line << k << seg << kind << text::format_fixed(c.mean_f1, 4) << '\n';
    }
    out << "\nMatched points (kmeans at k and 600/k minutes vs. time_based at k)\n\n";
    if (matched.points.empty()) out << "none\n";
    for (const auto& p : matched.points)
        out << name_of(p.classifier) << " k=" << p.k << " segment=" << p.segment_min
            << " kmeans=" << text::format_fixed(p.f1_kmeans_mean, 4) << " time_based=" << text::format_fixed(p.f1_time_mean, 4)
            << " delta=" << text::format_fixed(p.delta, 4) << '\n';
    for (const auto& w : matched.warnings) out << "warning: " << w << '\n';
}

inline constexpr std::string_view kAnnotationDistributionHeader = "subject,label,count";

inline void write_annotation_distribution_csv(std::ostream& out, const std::map<std::string, LabelCounts>& counts) {
    out << kAnnotationDistributionHeader << '\n';
    for (const auto& [subject, c] : counts)
        for (std::size_t l = 0; l < kLabelCount; ++l) out << subject << ',' << kLabelNames[l] << ',' << c[l] << '\n';
}

inline std::map<std::string, LabelCounts> read_annotation_distribution_csv(std::istream& in, const std::string& source) {
    text::LineReader reader(in, source);
    std::string line;
    if (!reader.next(line) || text::trim(line) != kAnnotationDistributionHeader)
        reader.fail("unexpected annotation distribution header");
    std::map<std::string, LabelCounts> out;
    while (reader.next(line)) {
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line);
        if (f.size() != 3) reader.fail("expected 3 fields");
        auto label = parse_label(text::trim(f[1]));
        auto n = text::parse_number<std::size_t>(f[2]);
        if (!label || !n) reader.fail("malformed annotation distribution row");
        out[std::string(text::trim(f[0]))][static_cast<std::size_t>(index_of(*label))] = *n;
    }
    return out;
}

inline LabelCounts annotation_counts(std::span<const AnnotationRecord> annotations) {
    LabelCounts c{};
    for (const auto& a : annotations) ++c[static_cast<std::size_t>(index_of(a.label))];
    return c;
}

}  // namespace report
}  // namespace bpdhar
