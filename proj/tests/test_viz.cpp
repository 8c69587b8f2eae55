#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "ctpm/viz.hpp"
#include "test_support.hpp"

using namespace ctpm;

namespace {

struct Figure {
    SymbolTable symbols{std::vector<Symbol>{{"A", "high", Severity::high}, {"B", "low", Severity::low}}};
    std::vector<PatternResult> patterns;

    Figure() {
        PatternResult r;
        const auto a = symbols.id("A", "high"), b = symbols.id("B", "low");
        r.pattern = canonical(TemporalPattern{{{start_of(a)}, {finish_of(a), start_of(b)}, {finish_of(b)}}});
        r.key = canonical_key(r.pattern, symbols);
        r.rr = 2.5;
        r.odds = 3.0;
        patterns.push_back(r);
    }
};

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

/// Tag-balance check: every opened element is closed in order.
bool balanced_xml(const std::string& svg) {
    std::vector<std::string> stack;
    std::regex tag(R"(<(/?)([A-Za-z][\w:-]*)[^>]*?(/?)>)");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), tag); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        if (m[3] == "/") continue;
        if (m[1] == "/") {
            if (stack.empty() || stack.back() != m[2]) return false;
            stack.pop_back();
        } else {
            stack.push_back(m[2]);
        }
    }
    return stack.empty();
}

std::vector<int> attr_values(const std::string& svg, const std::string& cls, const std::string& attr) {
    std::vector<int> out;
    std::regex re("class=\"" + cls + "\" x=\"(\\d+)\" y=\"(\\d+)\" width=\"(\\d+)\"");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
        if (attr == "x") out.push_back(std::stoi((*it)[1]));
        if (attr == "end") out.push_back(std::stoi((*it)[1]) + std::stoi((*it)[3]));
    }
    return out;
}

}  // namespace

TEST(Viz, EmptyRanking) {
    Figure f;
    const auto svg = render_svg({}, f.patterns, f.symbols);
    EXPECT_TRUE(balanced_xml(svg));
    EXPECT_NE(svg.find("time-axis"), std::string::npos);
    EXPECT_EQ(count(svg, "class=\"bar\""), 0u);
    EXPECT_EQ(count(svg, "class=\"pattern\""), 0u);
}

TEST(Viz, OnePatternLayout) {
    Figure f;
    const auto svg = render_svg({0}, f.patterns, f.symbols);
    EXPECT_TRUE(balanced_xml(svg));
    EXPECT_EQ(count(svg, "class=\"bar\""), 2u);
    EXPECT_NE(svg.find(">RR 2.50<"), std::string::npos);
    EXPECT_NE(svg.find(">P1<"), std::string::npos);
    const auto starts = attr_values(svg, "bar", "x"), ends = attr_values(svg, "bar", "end");
    ASSERT_EQ(starts.size(), 2u);
    EXPECT_EQ(ends[0], starts[1]);  // A ends where B starts
    EXPECT_LT(starts[0], starts[1]);
    EXPECT_NE(svg.find("fill=\"#9ecae1\""), std::string::npos);
    EXPECT_NE(svg.find("fill=\"#ff7f00\""), std::string::npos);
    EXPECT_NE(svg.find("A – high"), std::string::npos);
}

TEST(Viz, GoldenFile) {
    Figure f;
    std::ifstream in(std::string(CTPM_GOLDEN_DIR) + "/one_pattern.svg", std::ios::binary);
    ASSERT_TRUE(in);
    std::stringstream golden;
    golden << in.rdbuf();
    EXPECT_EQ(render_svg({0}, f.patterns, f.symbols), golden.str());
}

TEST(Viz, OddsRatioLabel) {
    Figure f;
    RenderSpec spec;
    spec.measure = RiskMeasure::odds_ratio;
    EXPECT_NE(render_svg({0}, f.patterns, f.symbols, spec).find(">OR 3.00<"), std::string::npos);
}

TEST(Viz, VeryLowIsRed) {
    SymbolTable symbols{std::vector<Symbol>{{"C", "very low", Severity::very_low}}};
    PatternResult r;
    r.pattern = TemporalPattern{{{start_of(0), finish_of(0)}}};
    r.key = "k";
    const auto svg = render_svg({0}, {r}, symbols);
    EXPECT_NE(svg.find("fill=\"#e41a1c\""), std::string::npos);
    EXPECT_EQ(ColorMap{}(Severity::other), "#999999");
    EXPECT_EQ(ColorMap{}(Severity::very_high), "#08519c");
    EXPECT_EQ(ColorMap{}(Severity::normal), "#4daf4a");
}

TEST(Viz, RowAndBarCounts) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        auto inst = test::random_instance(rng);
        inst.cfg.risk_threshold = 0.5;
        const auto results = mine(inst.db, inst.cfg);
        std::vector<std::size_t> order(results.size());
        std::iota(order.begin(), order.end(), 0);
        RenderSpec spec;
        spec.max_patterns = 3;
        const auto svg = render_svg(order, results, inst.db.symbols, spec);
        const std::size_t rows = std::min<std::size_t>(3, results.size());
        std::size_t bars = 0;
        for (std::size_t i = 0; i < rows; ++i) bars += results[i].pattern.length() / 2;
        EXPECT_EQ(count(svg, "class=\"pattern\""), rows);
        EXPECT_EQ(count(svg, "class=\"bar\""), bars);
        EXPECT_TRUE(balanced_xml(svg));
        EXPECT_EQ(svg, render_svg(order, results, inst.db.symbols, spec));
    }
}

TEST(Viz, EscapesText) {
    SymbolTable symbols{std::vector<Symbol>{{"a<b", "x&y", Severity::other}}};
    PatternResult r;
    r.pattern = TemporalPattern{{{start_of(0)}, {finish_of(0)}}};
    r.key = "\"q\"";
    const auto svg = render_svg({0}, {r}, symbols);
    EXPECT_TRUE(balanced_xml(svg));
    EXPECT_NE(svg.find("a&lt;b – x&amp;y"), std::string::npos);
}

TEST(Viz, Errors) {
    Figure f;
    RenderSpec spec;
    spec.max_patterns = 0;
    EXPECT_THROW(render_svg({0}, f.patterns, f.symbols, spec), ConfigError);
    EXPECT_THROW(render_svg({3}, f.patterns, f.symbols), ValidationError);
}
