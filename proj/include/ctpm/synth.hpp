#pragma once

// Seeded generator of wave-structured cohorts with planted temporal patterns,
// plus a ground-truth manifest recounted on the generated data.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctpm/abstraction.hpp"
#include "ctpm/config.hpp"
#include "ctpm/encoding.hpp"
#include "ctpm/error.hpp"
#include "ctpm/ingest.hpp"
#include "ctpm/miner.hpp"
#include "ctpm/pattern.hpp"
#include "ctpm/risk.hpp"

namespace ctpm {

/// Interval of a planted pattern; waves are offsets from the pattern's first wave (0-based).
struct PlantedInterval {
    std::string feature;
    std::string level;
    int start = 0;
    int end = 0;
};

struct PlantedPattern {
    std::vector<PlantedInterval> intervals;
    double event_fraction = 0.6;      ///< share of event patients carrying it
    double non_event_fraction = 0.1;  ///< share of non-event patients carrying it

    int span() const {
        int hi = 0;
        for (const auto& iv : intervals) hi = std::max(hi, iv.end);
        return hi + 1;
    }
};

struct SynthConfig {
    std::size_t patients = 200;
    int waves = 5;
    std::size_t features = 5;
    double event_rate = 0.2;
    double noise_rate = 0.1;  ///< per patient, feature and wave
    std::vector<PlantedPattern> planted;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Level alphabet shared by all synthetic features; raw value i + 0.5 falls in level i.
inline std::vector<Level> synth_levels() {
    return {{"very low", Severity::very_low},
            {"low", Severity::low},
            {"normal", Severity::normal},
            {"high", Severity::high},
            {"very high", Severity::very_high}};
}

inline std::string synth_feature_name(std::size_t index) {
    auto n = std::to_string(index + 1);
    return "F" + (n.size() < 2 ? "0" + n : n);
}

inline FeatureSpec synth_feature_spec(std::string name) {
    FeatureSpec spec;
    spec.name = std::move(name);
    spec.kind = FeatureKind::discrete;
    spec.rule.method = RuleMethod::cutoffs;
    spec.rule.points = {1.0, 2.0, 3.0, 4.0};
    spec.rule.levels = synth_levels();
    spec.normal_level = "normal";
    validate(spec);
    return spec;
}

inline FeatureConfig synth_feature_config(std::size_t features) {
    FeatureConfig config;
    for (std::size_t f = 0; f < features; ++f) config.push_back(synth_feature_spec(synth_feature_name(f)));
    return config;
}

/// A -high over two waves, ending as B -low starts: (A+) (A-,B+) (B-).
inline PlantedPattern default_planted_pattern(double event_fraction = 0.6, double non_event_fraction = 0.1) {
    return {{{"F01", "high", 0, 1}, {"F02", "low", 1, 2}}, event_fraction, non_event_fraction};
}

inline void SynthConfig::validate() const {
    if (patients < 1 || waves < 1 || features < 1) throw ConfigError("patients, waves and features must be >= 1");
    auto fraction = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!fraction(event_rate) || !fraction(noise_rate)) throw ConfigError("event and noise rates must lie in [0, 1]");
    const auto names = synth_levels();
    for (const auto& p : planted) {
        if (p.intervals.empty()) throw ConfigError("planted pattern without intervals");
        if (!fraction(p.event_fraction) || !fraction(p.non_event_fraction))
            throw ConfigError("carrier fractions must lie in [0, 1]");
        if (p.span() > waves)
            throw ConfigError("planted pattern spans " + std::to_string(p.span()) + " waves but the cohort has " +
                              std::to_string(waves));
        for (const auto& iv : p.intervals) {
            if (iv.start < 0 || iv.start > iv.end) throw ConfigError("planted interval with bad bounds");
            bool known = false;
            for (std::size_t f = 0; f < features; ++f) known = known || synth_feature_name(f) == iv.feature;
            if (!known) throw ConfigError("planted interval on unknown feature '" + iv.feature + "'");
            auto lv = std::find_if(names.begin(), names.end(), [&](const Level& l) { return l.name == iv.level; });
            if (lv == names.end() || lv->severity == Severity::normal)
                throw ConfigError("planted level '" + iv.level + "' must be a non-normal synthetic level");
        }
    }
}

struct PlantedTruth {
    std::string key;
    RiskStats stats;  ///< recounted by containment on the abstracted cohort
    double rr = 0.0;
    std::size_t injected_events = 0;
    std::size_t injected_non_events = 0;
};

struct SynthResult {
    RawCohort cohort;
    std::vector<PlantedTruth> truth;
    nlohmann::json manifest;
};

/// Endpoint pattern of a set of intervals under `symbols`.
inline TemporalPattern pattern_from_intervals(const std::vector<PlantedInterval>& intervals,
                                              const SymbolTable& symbols) {
    const auto levels = synth_levels();
    PatientIntervals p;
    for (const auto& iv : intervals) {
        auto lv = std::find_if(levels.begin(), levels.end(), [&](const Level& l) { return l.name == iv.level; });
        p.intervals.push_back({iv.feature, *lv, iv.start + 1, iv.end + 1});
    }
    TemporalPattern pattern;
    for (auto& g : encode(p, symbols).groups) pattern.groups.push_back(std::move(g.endpoints));
    return pattern;
}

inline SymbolTable symbols_of(const std::vector<PlantedInterval>& intervals) {
    const auto levels = synth_levels();
    std::vector<Symbol> out;
    for (const auto& iv : intervals) {
        auto lv = std::find_if(levels.begin(), levels.end(), [&](const Level& l) { return l.name == iv.level; });
        out.push_back({iv.feature, iv.level, lv->severity});
    }
    return SymbolTable(std::move(out));
}

inline std::string planted_key(const PlantedPattern& p) {
    const auto symbols = symbols_of(p.intervals);
    return canonical_key(pattern_from_intervals(p.intervals, symbols), symbols);
}

inline SynthResult generate(const SynthConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::bernoulli_distribution is_event(cfg.event_rate);
    std::bernoulli_distribution is_noise(cfg.noise_rate);
    std::uniform_int_distribution<int> any_wave(1, cfg.waves);
    std::uniform_int_distribution<int> off_normal(0, 3);
    constexpr int kNormal = 2;

    const auto n_digits = std::to_string(cfg.patients).size();
    SynthResult out;
    out.cohort.wave_count = cfg.waves;
    out.cohort.features = synth_feature_config(cfg.features);
    out.truth.resize(cfg.planted.size());

    for (std::size_t i = 0; i < cfg.patients; ++i) {
        auto id = std::to_string(i + 1);
        id = "S" + std::string(n_digits - id.size(), '0') + id;

        const bool event = is_event(rng);
        int time = event ? any_wave(rng) : cfg.waves;

        // levels[f][w - 1]
        std::vector<std::vector<int>> levels(cfg.features, std::vector<int>(static_cast<std::size_t>(cfg.waves), kNormal));
        for (auto& row : levels)
            for (auto& lv : row)
                if (is_noise(rng)) {
                    const int k = off_normal(rng);
                    lv = k < kNormal ? k : k + 1;
                }

        for (std::size_t p = 0; p < cfg.planted.size(); ++p) {
            const auto& pat = cfg.planted[p];
            const double frac = event ? pat.event_fraction : pat.non_event_fraction;
            if (!std::bernoulli_distribution(frac)(rng)) continue;
            const int span = pat.span();
            time = std::max(time, span);  // the pattern must be observed before the event
            const int offset = std::uniform_int_distribution<int>(1, time - span + 1)(rng);
            // Planted features hold normal outside their intervals so the
            // injected intervals keep their exact boundaries.
            for (const auto& iv : pat.intervals) {
                const auto f = static_cast<std::size_t>(std::stoi(iv.feature.substr(1)) - 1);
                std::fill(levels[f].begin(), levels[f].end(), kNormal);
            }
            const auto lvls = synth_levels();
            for (const auto& iv : pat.intervals) {
                const auto f = static_cast<std::size_t>(std::stoi(iv.feature.substr(1)) - 1);
                const auto lv = std::find_if(lvls.begin(), lvls.end(), [&](const Level& l) { return l.name == iv.level; });
                for (int w = offset + iv.start; w <= offset + iv.end; ++w)
                    levels[f][static_cast<std::size_t>(w - 1)] = static_cast<int>(lv - lvls.begin());
            }
            (event ? out.truth[p].injected_events : out.truth[p].injected_non_events)++;
        }

        PatientRecord rec;
        rec.patient_id = std::move(id);
        rec.outcome = {static_cast<double>(time), event};
        for (std::size_t f = 0; f < cfg.features; ++f) {
            auto& obs = rec.values[synth_feature_name(f)];
            for (int w = 1; w <= time; ++w) obs.push_back({w, levels[f][static_cast<std::size_t>(w - 1)] + 0.5});
        }
        out.cohort.patients.push_back(std::move(rec));
    }

    const auto db = encode_cohort(abstract_cohort(out.cohort).patients);
    auto planted_json = nlohmann::json::array();
    for (std::size_t p = 0; p < cfg.planted.size(); ++p) {
        auto& t = out.truth[p];
        const auto& pat = cfg.planted[p];
        t.key = planted_key(pat);
        bool present = true;
        for (const auto& iv : pat.intervals) present = present && db.symbols.contains(iv.feature, iv.level);
        const std::size_t events = db.event_count();
        t.stats = present ? count_by_containment(db, pattern_from_intervals(pat.intervals, db.symbols))
                          : RiskStats::from_counts(0, 0, events, db.size() - events);
        t.rr = t.stats.risk_defined() ? relative_risk(t.stats) : 0.0;

        auto ivs = nlohmann::json::array();
        for (const auto& iv : pat.intervals)
            ivs.push_back({{"feature", iv.feature}, {"level", iv.level}, {"start", iv.start}, {"end", iv.end}});
        nlohmann::json entry = {{"key", t.key},
                                {"intervals", std::move(ivs)},
                                {"event_fraction", pat.event_fraction},
                                {"non_event_fraction", pat.non_event_fraction},
                                {"injected_events", t.injected_events},
                                {"injected_non_events", t.injected_non_events},
                                {"a", t.stats.a},
                                {"b", t.stats.b},
                                {"c", t.stats.c},
                                {"d", t.stats.d}};
        entry["rr"] = t.stats.risk_defined() ? nlohmann::json(t.rr) : nlohmann::json(nullptr);
        planted_json.push_back(std::move(entry));
    }
    out.manifest = {{"seed", cfg.seed},
                    {"patients", cfg.patients},
                    {"waves", cfg.waves},
                    {"features", cfg.features},
                    {"event_rate", cfg.event_rate},
                    {"noise_rate", cfg.noise_rate},
                    {"events", out.cohort.event_count()},
                    {"planted", std::move(planted_json)}};
    return out;
}

}  // namespace ctpm
