// Static SVG line charts, one file per metric, one polyline per grid point.
// Self-contained vector output: no scripts, no external assets. Gaps in a
// series (slots where a metric is undefined) break the polyline rather than
// interpolating across the hole.
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "csv.hpp"
#include "engine.hpp"

namespace iovmesh {

struct ChartSeries {
    std::string label;
    std::vector<std::optional<double>> values;  // index = slot
};

namespace detail {

inline const char* chart_color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
    return palette[i % (sizeof palette / sizeof palette[0])];
}

inline std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

// A short "nice" representation for tick labels.
inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace detail

inline void emit_chart(const std::string& title, const std::string& y_label,
                       const std::vector<ChartSeries>& series, std::ostream& out) {
    if (series.empty()) throw std::invalid_argument("emit_chart: no series");
    std::size_t n_slots = 0;
    double y_max = 0.0;
    for (const auto& s : series) {
        n_slots = std::max(n_slots, s.values.size());
        for (const auto& v : s.values)
            if (v) y_max = std::max(y_max, *v);
    }
    if (n_slots == 0) throw std::invalid_argument("emit_chart: empty series");
    if (y_max <= 0.0) y_max = 1.0;
    y_max *= 1.05;  // headroom so the top of a curve is never clipped

    const double width = 860, height = 520;
    const double ml = 78, mr = 24, mt = 46, mb = 56;
    const double pw = width - ml - mr, ph = height - mt - mb;
    const double x_max = static_cast<double>(n_slots > 1 ? n_slots - 1 : 1);

    const auto X = [&](double slot) { return ml + pw * slot / x_max; };
    const auto Y = [&](double v) { return mt + ph * (1.0 - v / y_max); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"26\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"17\" fill=\"#222\">"
        << detail::svg_escape(title) << "</text>\n";

    // gridlines and ticks
    const int n_ticks = 6;
    for (int t = 0; t <= n_ticks; ++t) {
        const double yv = y_max * t / n_ticks;
        const double y = Y(yv);
        out << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + pw << "\" y2=\"" << y
            << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
            << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#444\">"
            << detail::tick_label(yv) << "</text>\n";
        const double xv = x_max * t / n_ticks;
        const double x = X(xv);
        out << "<line x1=\"" << x << "\" y1=\"" << mt << "\" x2=\"" << x << "\" y2=\"" << mt + ph
            << "\" stroke=\"#eeeeee\" stroke-width=\"1\"/>\n"
            << "<text x=\"" << x << "\" y=\"" << mt + ph + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#444\">"
            << detail::tick_label(std::round(xv)) << "</text>\n";
    }

    // axes and labels
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\" stroke=\"#333\" stroke-width=\"1.5\"/>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
        << mt + ph << "\" stroke=\"#333\" stroke-width=\"1.5\"/>\n"
        << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "fill=\"#222\">time slot</text>\n"
        << "<text x=\"20\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#222\" "
        << "transform=\"rotate(-90 20 " << mt + ph / 2 << ")\">" << detail::svg_escape(y_label)
        << "</text>\n";

    // one polyline per series, split at undefined slots
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        std::string d;
        bool open = false;
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            if (!s.values[i]) {
                open = false;
                continue;
            }
            char pt[64];
            std::snprintf(pt, sizeof pt, "%s%.2f %.2f", open ? "L" : "M",
                          X(static_cast<double>(i)), Y(*s.values[i]));
            d += pt;
            open = true;
        }
        if (!d.empty())
            out << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << detail::chart_color(si)
                << "\" stroke-width=\"1.8\"/>\n";
    }

    // legend, top-right inside the plot
    const double lx = ml + pw - 190, ly = mt + 10;
    out << "<rect x=\"" << lx - 8 << "\" y=\"" << ly - 6 << "\" width=\"196\" height=\""
        << series.size() * 19 + 10 << "\" fill=\"#ffffff\" fill-opacity=\"0.85\" "
        << "stroke=\"#cccccc\"/>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const double y = ly + 10 + static_cast<double>(si) * 19;
        out << "<line x1=\"" << lx << "\" y1=\"" << y << "\" x2=\"" << lx + 26 << "\" y2=\"" << y
            << "\" stroke=\"" << detail::chart_color(si) << "\" stroke-width=\"2.5\"/>\n"
            << "<text x=\"" << lx + 34 << "\" y=\"" << y + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">"
            << detail::svg_escape(series[si].label) << "</text>\n";
    }
    out << "</svg>\n";
}

// The five metric charts for a sweep; returns the written file paths.
inline std::vector<std::string> emit_charts(const std::vector<SweepPointResult>& points,
                                            const std::string& dir) {
    if (points.empty()) throw std::invalid_argument("emit_charts: no series");

    struct Metric {
        const char* file;
        const char* title;
        const char* y_label;
        std::optional<double> (*get)(const MeanMetricsRow&);
    };
    static const Metric metrics[] = {
        {"chart_loss_rate.svg", "Packet loss rate", "loss rate (fraction)",
         [](const MeanMetricsRow& r) { return r.loss_rate; }},
        {"chart_arrive_rate.svg", "Task arrival rate", "arrival rate (fraction)",
         [](const MeanMetricsRow& r) { return r.arrive_rate; }},
        {"chart_node_load.svg", "Node load rate", "node load (fraction)",
         [](const MeanMetricsRow& r) { return r.node_load; }},
        {"chart_link_load.svg", "Link load rate", "link load (fraction)",
         [](const MeanMetricsRow& r) { return r.link_load; }},
        {"chart_sumflow.svg", "Total network traffic", "packets (forwarded + cached)",
         [](const MeanMetricsRow& r) { return std::optional<double>(r.sumflow); }},
    };

    std::vector<std::string> written;
    for (const auto& m : metrics) {
        std::vector<ChartSeries> series;
        series.reserve(points.size());
        for (const auto& p : points) {
            ChartSeries s;
            s.label = p.point.label.empty() ? "run" : p.point.label;
            s.values.reserve(p.mean.rows.size());
            for (const auto& row : p.mean.rows) s.values.push_back(m.get(row));
            series.push_back(std::move(s));
        }
        const std::string path = dir + "/" + m.file;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write chart file '" + path + "'");
        emit_chart(m.title, m.y_label, series, out);
        written.push_back(path);
    }
    return written;
}

}  // namespace iovmesh
