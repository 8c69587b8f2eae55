#pragma once

// 2x2 contingency statistics and the two interestingness measures.

#include <cstddef>
#include <string>

#include "ctpm/error.hpp"

namespace ctpm {

enum class RiskMeasure { relative_risk, odds_ratio };

/// Patient-level 2x2 table for one pattern.
///   a: pattern & event      b: pattern & no event
///   c: no pattern & event   d: no pattern & no event
struct RiskStats {
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t c = 0;
    std::size_t d = 0;

    std::size_t total() const noexcept { return a + b + c + d; }
    std::size_t carriers() const noexcept { return a + b; }

    double support_pop() const noexcept {
        return total() ? static_cast<double>(a + b) / static_cast<double>(total()) : 0.0;
    }
    double support_event() const noexcept {
        return a + c ? static_cast<double>(a) / static_cast<double>(a + c) : 0.0;
    }

    /// Risk is defined iff the pattern is neither absent nor universal.
    bool risk_defined() const noexcept { return a + b > 0 && c + d > 0; }

    bool operator==(const RiskStats&) const = default;

    /// Table for `carriers_event` event carriers and `carriers_other`
    /// non-event carriers out of a cohort with the given totals.
    static RiskStats from_counts(std::size_t carriers_event, std::size_t carriers_other, std::size_t events,
                                 std::size_t non_events) {
        return {carriers_event, carriers_other, events - carriers_event, non_events - carriers_other};
    }
};

namespace detail {
struct Cells {
    double a, b, c, d;
};

/// Haldane-Anscombe: +0.5 on all four cells when any cell is zero.
inline Cells corrected_cells(const RiskStats& s) {
    if (!s.risk_defined())
        throw UndefinedRiskError("risk undefined: pattern present in " +
                                 std::string(s.a + s.b == 0 ? "no" : "every") + " patient");
    Cells c{static_cast<double>(s.a), static_cast<double>(s.b), static_cast<double>(s.c), static_cast<double>(s.d)};
    if (s.a == 0 || s.b == 0 || s.c == 0 || s.d == 0) {
        c.a += 0.5;
        c.b += 0.5;
        c.c += 0.5;
        c.d += 0.5;
    }
    return c;
}
}  // namespace detail

/// RR = (a/(a+b)) / (c/(c+d)).
inline double relative_risk(const RiskStats& s) {
    const auto x = detail::corrected_cells(s);
    return (x.a / (x.a + x.b)) / (x.c / (x.c + x.d));
}

/// OR = (a*d)/(b*c).
inline double odds_ratio(const RiskStats& s) {
    const auto x = detail::corrected_cells(s);
    return (x.a * x.d) / (x.b * x.c);
}

inline double risk(const RiskStats& s, RiskMeasure m) {
    return m == RiskMeasure::relative_risk ? relative_risk(s) : odds_ratio(s);
}

inline std::string to_string(RiskMeasure m) { return m == RiskMeasure::relative_risk ? "rr" : "or"; }

inline RiskMeasure parse_measure(const std::string& text) {
    if (text == "rr") return RiskMeasure::relative_risk;
    if (text == "or") return RiskMeasure::odds_ratio;
    throw ConfigError("measure must be 'rr' or 'or', got '" + text + "'");
}

}  // namespace ctpm
