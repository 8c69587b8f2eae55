#pragma once

// Static SVG figure of ranked patterns: one row per pattern, one rounded bar
// per interval, horizontal position by endpoint group.

#include <array>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ctpm/config.hpp"
#include "ctpm/encoding.hpp"
#include "ctpm/error.hpp"
#include "ctpm/matrix.hpp"
#include "ctpm/miner.hpp"
#include "ctpm/pattern.hpp"
#include "ctpm/risk.hpp"

namespace ctpm {

struct ColorMap {
    std::array<std::string, 6> fill = {"#e41a1c", "#ff7f00", "#4daf4a", "#9ecae1", "#08519c", "#999999"};

    const std::string& operator()(Severity s) const { return fill[static_cast<std::size_t>(s)]; }
};

struct RenderSpec {
    std::size_t max_patterns = 10;
    RiskMeasure measure = RiskMeasure::relative_risk;  ///< value shown in the gutter
    int bar_height = 22;
    int bar_gap = 6;
    int row_gap = 18;
    int group_width = 110;
    int gutter = 120;
    int margin = 20;
    int header = 50;
    ColorMap colors;
};

/// Bar of one interval inside a pattern, in group indices.
struct PatternBar {
    SymbolId symbol = 0;
    std::size_t first = 0;
    std::size_t last = 0;
};

/// Pairs each Start with its Finish; bars ordered by start group then symbol.
inline std::vector<PatternBar> pattern_bars(const TemporalPattern& pattern) {
    std::vector<PatternBar> bars;
    std::map<SymbolId, std::size_t> open;
    const auto c = canonical(pattern);
    for (std::size_t g = 0; g < c.groups.size(); ++g)
        for (const auto& e : c.groups[g]) {
            if (e.is_start()) {
                open[e.symbol] = bars.size();
                bars.push_back({e.symbol, g, g});
            } else if (auto it = open.find(e.symbol); it != open.end()) {
                bars[it->second].last = g;
                open.erase(it);
            }
        }
    return bars;
}

namespace detail {

inline std::string xml_escape(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

inline std::string fixed2(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

}  // namespace detail

/// `ranking` lists indices into `patterns`, best first.
inline std::string render_svg(const std::vector<std::size_t>& ranking, const std::vector<PatternResult>& patterns,
                              const SymbolTable& symbols, const RenderSpec& spec = {}) {
    if (spec.max_patterns < 1) throw ConfigError("max patterns must be >= 1");
    const std::size_t rows = std::min(spec.max_patterns, ranking.size());
    for (std::size_t r = 0; r < rows; ++r)
        if (ranking[r] >= patterns.size()) throw ValidationError("ranking refers to a missing pattern");

    std::size_t max_groups = 1;
    int height = spec.header;
    std::vector<std::vector<PatternBar>> row_bars;
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& p = patterns[ranking[r]].pattern;
        max_groups = std::max(max_groups, p.groups.size());
        row_bars.push_back(pattern_bars(p));
        const int n = static_cast<int>(std::max<std::size_t>(row_bars.back().size(), 1));
        height += n * (spec.bar_height + spec.bar_gap) + spec.row_gap;
    }
    height += spec.margin;
    const int plot_left = spec.margin + spec.gutter;
    const int width = plot_left + static_cast<int>(max_groups) * spec.group_width + spec.margin;
    auto group_x = [&](std::size_t g) { return plot_left + static_cast<int>(g) * spec.group_width + spec.group_width / 2; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<defs><marker id=\"arrow\" markerWidth=\"10\" markerHeight=\"8\" refX=\"9\" refY=\"4\" orient=\"auto\">"
        << "<path d=\"M0,0 L10,4 L0,8 z\" fill=\"#333333\"/></marker></defs>\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";

    const int arrow_y = spec.margin + 8;
    svg << "<g class=\"time-axis\"><line x1=\"" << plot_left << "\" y1=\"" << arrow_y << "\" x2=\""
        << width - spec.margin << "\" y2=\"" << arrow_y
        << "\" stroke=\"#333333\" stroke-width=\"1.5\" marker-end=\"url(#arrow)\"/>"
        << "<text x=\"" << plot_left << "\" y=\"" << arrow_y - 6 << "\">time</text></g>\n";

    const std::string label = spec.measure == RiskMeasure::relative_risk ? "RR " : "OR ";
    int y = spec.header;
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& res = patterns[ranking[r]];
        const auto& bars = row_bars[r];
        const int row_h = static_cast<int>(std::max<std::size_t>(bars.size(), 1)) * (spec.bar_height + spec.bar_gap);
        const double value = spec.measure == RiskMeasure::relative_risk ? res.rr : res.odds;
        svg << "<g class=\"pattern\" data-key=\"" << detail::xml_escape(res.key) << "\">\n"
            << "<text class=\"pattern-id\" x=\"" << spec.margin << "\" y=\"" << y + spec.bar_height / 2 + 4
            << "\" font-weight=\"bold\">" << column_name(ranking[r]) << "</text>\n"
            << "<text class=\"risk\" x=\"" << spec.margin + 40 << "\" y=\"" << y + spec.bar_height / 2 + 4 << "\">"
            << label << detail::fixed2(value) << "</text>\n";
        for (std::size_t b = 0; b < bars.size(); ++b) {
            const auto& sym = symbols[bars[b].symbol];
            const int x0 = group_x(bars[b].first);
            const int x1 = std::max(group_x(bars[b].last), x0 + 4);
            const int by = y + static_cast<int>(b) * (spec.bar_height + spec.bar_gap);
            svg << "<rect class=\"bar\" x=\"" << x0 << "\" y=\"" << by << "\" width=\"" << x1 - x0 << "\" height=\""
                << spec.bar_height << "\" rx=\"8\" ry=\"8\" fill=\"" << spec.colors(sym.severity)
                << "\" stroke=\"#333333\" stroke-width=\"0.5\"/>\n"
                << "<text x=\"" << x0 + 6 << "\" y=\"" << by + spec.bar_height / 2 + 4 << "\">"
                << detail::xml_escape(sym.feature + " – " + sym.level) << "</text>\n";
        }
        svg << "</g>\n";
        y += row_h + spec.row_gap;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace ctpm
