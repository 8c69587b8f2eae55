#pragma once

// Temporal abstraction: raw values -> named levels -> maximal state intervals.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ctpm/config.hpp"
#include "ctpm/error.hpp"
#include "ctpm/ingest.hpp"

namespace ctpm {

/// A (feature, level) state holding over waves [start, end], inclusive.
struct StateInterval {
    std::string feature;
    Level level;
    int start = 0;
    int end = 0;

    bool operator==(const StateInterval&) const = default;
};

/// Percentile edges by linear interpolation between order statistics:
/// the p-th percentile sits at 1-based rank 1 + (n-1)p/100.
inline std::vector<double> fit_percentiles(std::span<const double> values, std::span<const double> points) {
    if (values.empty()) throw FitError("cannot fit percentiles of an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back())
        throw DegenerateDistributionError("all values identical (" + csv::format_double(sorted.front()) + ")");

    const auto n = static_cast<double>(sorted.size());
    std::vector<double> edges;
    edges.reserve(points.size());
    for (double p : points) {
        if (!(p > 0.0 && p < 100.0)) throw FitError("percentile point outside (0,100)");
        const double rank = (n - 1.0) * p / 100.0;  // 0-based
        const auto lo = static_cast<std::size_t>(std::floor(rank));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        const double frac = rank - static_cast<double>(lo);
        edges.push_back(sorted[lo] + frac * (sorted[hi] - sorted[lo]));
    }
    return edges;
}

/// Maps a raw value to its level. Bins are [lower, upper); the last bin is
/// unbounded above. `edges` are the cutoffs or the fitted percentile edges.
inline const Level& abstract_value(const RawValue& value, const AbstractionRule& rule, std::span<const double> edges) {
    if (is_missing(value)) throw MappingError("cannot abstract a missing value");
    if (rule.method == RuleMethod::categorical) {
        const auto* cat = std::get_if<std::string>(&value);
        const std::string text = cat ? *cat : csv::format_double(std::get<double>(value));
        auto it = rule.categories.find(text);
        if (it == rule.categories.end()) throw MappingError("category '" + text + "' is not listed in the rule");
        return *rule.find_level(it->second);
    }
    const auto* num = std::get_if<double>(&value);
    if (!num) throw MappingError("numeric rule applied to categorical value '" + std::get<std::string>(value) + "'");
    if (rule.levels.size() != edges.size() + 1) throw MappingError("edge count does not match level count");
    const auto bin = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), *num) - edges.begin());
    return rule.levels[bin];
}

/// A feature spec together with the edges used to discretise it.
struct FittedFeature {
    FeatureSpec spec;
    std::vector<double> edges;
    /// Single-level after fitting; such features are left out of mining.
    bool excluded = false;
    std::string warning;
};

/// Fits percentile rules on every observed value pooled over patients and waves.
inline FittedFeature fit_feature(const FeatureSpec& spec, const RawCohort& cohort) {
    FittedFeature fitted{spec, {}, false, {}};
    switch (spec.rule.method) {
        case RuleMethod::cutoffs: fitted.edges = spec.rule.points; return fitted;
        case RuleMethod::categorical: return fitted;
        case RuleMethod::percentiles:
        case RuleMethod::custom_percentiles: break;
    }
    std::vector<double> pooled;
    for (const auto& p : cohort.patients) {
        auto it = p.values.find(spec.name);
        if (it == p.values.end()) continue;
        for (const auto& o : it->second)
            if (const auto* v = std::get_if<double>(&o.value)) pooled.push_back(*v);
    }
    try {
        fitted.edges = fit_percentiles(pooled, spec.rule.points);
        if (std::adjacent_find(fitted.edges.begin(), fitted.edges.end(), std::greater_equal<>()) != fitted.edges.end())
            throw DegenerateDistributionError("percentile edges collapse");
    } catch (const FitError& e) {
        fitted.excluded = true;
        fitted.warning = "feature '" + spec.name + "' is single-level and excluded from mining: " + e.what();
    }
    return fitted;
}

/// Aggregates maximal runs of equal level into intervals. Only waves up to
/// `horizon` are used; a missing wave ends the current run.
inline std::vector<StateInterval> build_intervals(const PatientRecord& patient, std::span<const FittedFeature> features,
                                                  int horizon) {
    std::vector<StateInterval> out;
    for (const auto& f : features) {
        if (f.excluded) continue;
        auto it = patient.values.find(f.spec.name);
        if (it == patient.values.end()) continue;
        bool open = false;
        std::size_t open_index = 0;
        for (const auto& o : it->second) {
            if (o.wave > horizon) break;
            if (is_missing(o.value)) {
                open = false;
                continue;
            }
            const Level& level = abstract_value(o.value, f.spec.rule, f.edges);
            if (open && out[open_index].level.name == level.name && out[open_index].end + 1 == o.wave) {
                out[open_index].end = o.wave;
                continue;
            }
            out.push_back({f.spec.name, level, o.wave, o.wave});
            open_index = out.size() - 1;
            open = true;
        }
    }
    return out;
}

struct PatientIntervals {
    std::string patient_id;
    SurvivalOutcome outcome;
    std::vector<StateInterval> intervals;

    bool operator==(const PatientIntervals&) const = default;
};

struct AbstractedCohort {
    int wave_count = 0;
    std::vector<PatientIntervals> patients;
    std::vector<std::string> warnings;
};

/// carry_forward -> fit -> build_intervals for the whole cohort.
inline AbstractedCohort abstract_cohort(const RawCohort& cohort, const CarryForwardOptions& opts = {}) {
    std::vector<FittedFeature> fitted;
    AbstractedCohort out;
    out.wave_count = cohort.wave_count;
    for (const auto& spec : cohort.features) {
        fitted.push_back(fit_feature(spec, cohort));
        if (fitted.back().excluded) out.warnings.push_back(fitted.back().warning);
    }
    const auto filled = carry_forward(cohort, opts);
    for (const auto& p : filled.patients) {
        const int horizon = observation_horizon(p, cohort.wave_count, opts);
        out.patients.push_back({p.patient_id, p.outcome, build_intervals(p, fitted, horizon)});
    }
    return out;
}

}  // namespace ctpm
