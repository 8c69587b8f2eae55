#pragma once

// Wave-structured cohort input: long-format CSV parsing, outcome join and
// last-observation-carried-forward imputation.

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ctpm/config.hpp"
#include "ctpm/csv.hpp"
#include "ctpm/error.hpp"

namespace ctpm {

/// Missing, numeric, or categorical raw value.
using RawValue = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const RawValue& v) { return std::holds_alternative<std::monostate>(v); }

struct Observation {
    int wave = 0;
    RawValue value;

    bool operator==(const Observation&) const = default;
};

/// Outcome in wave units. event=false means censored at `time`.
struct SurvivalOutcome {
    double time = 1.0;
    bool event = false;

    bool operator==(const SurvivalOutcome&) const = default;
};

struct PatientRecord {
    std::string patient_id;
    /// feature name -> observations sorted by strictly increasing wave
    std::map<std::string, std::vector<Observation>> values;
    SurvivalOutcome outcome;

    bool operator==(const PatientRecord&) const = default;
};

struct RawCohort {
    int wave_count = 0;
    FeatureConfig features;
    /// sorted by patient_id
    std::vector<PatientRecord> patients;

    std::size_t event_count() const {
        return static_cast<std::size_t>(
            std::count_if(patients.begin(), patients.end(), [](const auto& p) { return p.outcome.event; }));
    }

    bool operator==(const RawCohort&) const = default;
};

struct CarryForwardOptions {
    /// Stop carrying at min(outcome time, wave_count). Disabling carries up
    /// to wave_count, letting post-event states leak into the predictors.
    bool stop_at_outcome = true;
};

/// Last wave whose values may be used for a patient.
inline int observation_horizon(const PatientRecord& p, int wave_count, const CarryForwardOptions& opts = {}) {
    if (!opts.stop_at_outcome) return wave_count;
    const int outcome_wave = static_cast<int>(std::floor(p.outcome.time));
    return std::clamp(outcome_wave, 0, wave_count);
}

namespace detail {

inline RawValue parse_raw_value(const FeatureSpec& spec, const std::string& text, std::size_t line_no) {
    if (text.empty()) return std::monostate{};
    if (spec.kind == FeatureKind::categorical) return text;
    auto v = csv::parse_double(text);
    if (!v || !std::isfinite(*v))
        throw ParseError("feature '" + spec.name + "': non-numeric value '" + text + "'", line_no);
    return *v;
}

inline std::string format_raw_value(const RawValue& v) {
    if (std::holds_alternative<double>(v)) return csv::format_double(std::get<double>(v));
    if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
    return {};
}

}  // namespace detail

/// Reads outcome CSV (`patient_id,time,event`).
inline std::map<std::string, SurvivalOutcome> parse_outcomes(std::istream& in) {
    std::size_t line_no = 0;
    csv::expect_header(in, {"patient_id", "time", "event"}, line_no);
    std::map<std::string, SurvivalOutcome> outcomes;
    std::string line;
    while (csv::next_line(in, line, line_no)) {
        auto f = csv::split(line, line_no);
        if (f.size() != 3) throw ParseError("expected 3 fields", line_no);
        if (f[0].empty()) throw ParseError("empty patient_id", line_no);
        auto time = csv::parse_double(f[1]);
        if (!time || !std::isfinite(*time) || *time < 1.0)
            throw ParseError("outcome time must be a number >= 1", line_no);
        if (f[2] != "0" && f[2] != "1") throw ParseError("event must be 0 or 1", line_no);
        if (!outcomes.emplace(f[0], SurvivalOutcome{*time, f[2] == "1"}).second)
            throw ConflictError("duplicate outcome for patient '" + f[0] + "'", line_no);
    }
    return outcomes;
}

/// Parses the long-format cohort CSV (`patient_id,wave,feature,value`) and
/// joins the outcomes. `wave_count` <= 0 infers it from the largest wave seen.
inline RawCohort parse_cohort(std::istream& data, std::istream& outcome_stream, const FeatureConfig& config,
                              int wave_count = 0) {
    auto outcomes = parse_outcomes(outcome_stream);

    RawCohort cohort;
    cohort.features = config;
    std::map<std::string, PatientRecord> patients;
    std::map<std::string, std::size_t> cell_line;  // duplicate-cell detection

    std::size_t line_no = 0;
    csv::expect_header(data, {"patient_id", "wave", "feature", "value"}, line_no);
    std::string line;
    int max_wave = 0;
    while (csv::next_line(data, line, line_no)) {
        auto f = csv::split(line, line_no);
        if (f.size() != 4) throw ParseError("expected 4 fields", line_no);
        if (f[0].empty()) throw ParseError("empty patient_id", line_no);
        auto wave = csv::parse_int(f[1]);
        if (!wave || *wave < 1) throw ParseError("wave must be an integer >= 1", line_no);
        if (wave_count > 0 && *wave > wave_count)
            throw ParseError("wave " + f[1] + " exceeds wave count " + std::to_string(wave_count), line_no);
        const auto* spec = find_feature(config, f[2]);
        if (!spec) throw ValidationError("line " + std::to_string(line_no) + ": unknown feature '" + f[2] + "'");

        const auto cell = f[0] + '\x1f' + f[2] + '\x1f' + f[1];
        if (auto [it, fresh] = cell_line.emplace(cell, line_no); !fresh)
            throw ConflictError("duplicate cell (patient '" + f[0] + "', feature '" + f[2] + "', wave " + f[1] +
                                    "), first seen on line " + std::to_string(it->second),
                                line_no);

        auto& rec = patients[f[0]];
        rec.patient_id = f[0];
        rec.values[f[2]].push_back({static_cast<int>(*wave), detail::parse_raw_value(*spec, f[3], line_no)});
        max_wave = std::max(max_wave, static_cast<int>(*wave));
    }

    for (auto& [id, rec] : patients) {
        auto it = outcomes.find(id);
        if (it == outcomes.end()) throw ValidationError("patient '" + id + "' has no outcome");
        rec.outcome = it->second;
        for (auto& [feature, obs] : rec.values)
            std::sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) { return a.wave < b.wave; });
    }
    // Outcome-only patients still belong to the cohort (empty sequences).
    for (const auto& [id, outcome] : outcomes) {
        auto& rec = patients[id];
        rec.patient_id = id;
        rec.outcome = outcome;
    }

    cohort.wave_count = wave_count > 0 ? wave_count : max_wave;
    for (auto& [id, rec] : patients) cohort.patients.push_back(std::move(rec));
    return cohort;
}

inline void write_cohort_csv(const RawCohort& cohort, std::ostream& out) {
    csv::write_row(out, {"patient_id", "wave", "feature", "value"});
    for (const auto& p : cohort.patients)
        for (const auto& [feature, obs] : p.values)
            for (const auto& o : obs)
                csv::write_row(out, {p.patient_id, std::to_string(o.wave), feature, detail::format_raw_value(o.value)});
}

inline void write_outcomes_csv(const RawCohort& cohort, std::ostream& out) {
    csv::write_row(out, {"patient_id", "time", "event"});
    for (const auto& p : cohort.patients)
        csv::write_row(out, {p.patient_id, csv::format_double(p.outcome.time), p.outcome.event ? "1" : "0"});
}

/// Fills each gap after a feature's first observed value, up to the
/// patient's observation horizon, with the most recent prior value.
/// Observed values are never changed and nothing is filled backwards.
inline PatientRecord carry_forward(const PatientRecord& patient, int wave_count, const CarryForwardOptions& opts = {}) {
    PatientRecord out = patient;
    const int horizon = observation_horizon(patient, wave_count, opts);
    for (auto& [feature, obs] : out.values) {
        std::map<int, RawValue> by_wave;
        for (const auto& o : obs) by_wave[o.wave] = o.value;

        const RawValue* last = nullptr;
        for (int w = 1; w <= horizon; ++w) {
            auto it = by_wave.find(w);
            if (it != by_wave.end() && !is_missing(it->second)) {
                last = &it->second;
            } else if (last) {
                by_wave[w] = *last;
                last = &by_wave[w];
            }
        }
        obs.clear();
        for (auto& [w, v] : by_wave) obs.push_back({w, std::move(v)});
    }
    return out;
}

inline RawCohort carry_forward(const RawCohort& cohort, const CarryForwardOptions& opts = {}) {
    RawCohort out = cohort;
    for (auto& p : out.patients) p = carry_forward(p, cohort.wave_count, opts);
    return out;
}

}  // namespace ctpm
