#pragma once

// Helpers shared by the test binaries: compact database builders and a
// seeded generator of small random databases.

#include <random>
#include <string>
#include <vector>

#include "ctpm/encoding.hpp"
#include "ctpm/miner.hpp"

namespace ctpm::test {

/// Interval on a one-letter state, e.g. {"A", 1, 2} is A-high over waves 1..2.
struct Iv {
    std::string feature;
    int start;
    int end;
    std::string level = "high";
    Severity severity = Severity::high;
};

inline PatientIntervals patient(std::string id, bool event, std::vector<Iv> ivs, double time = 5.0) {
    PatientIntervals p{std::move(id), {time, event}, {}};
    for (auto& iv : ivs) p.intervals.push_back({iv.feature, {iv.level, iv.severity}, iv.start, iv.end});
    return p;
}

inline SequenceDatabase database(const std::vector<PatientIntervals>& patients) { return encode_cohort(patients); }

/// Pattern from text like "A+ | A-,B+ | B-" over states named `<feature>` at level "high".
inline TemporalPattern parse_pattern(const std::string& text, const SymbolTable& symbols,
                                     const std::string& level = "high") {
    TemporalPattern p;
    EndpointSet group;
    std::string token;
    auto flush_token = [&] {
        if (token.empty()) return;
        const char kind = token.back();
        token.pop_back();
        const auto id = symbols.id(token, level);
        group.push_back(kind == '+' ? start_of(id) : finish_of(id));
        token.clear();
    };
    for (char ch : text) {
        if (ch == ' ') continue;
        if (ch == ',') {
            flush_token();
        } else if (ch == '|') {
            flush_token();
            p.groups.push_back(group);
            group.clear();
        } else {
            token.push_back(ch);
        }
    }
    flush_token();
    if (!group.empty()) p.groups.push_back(group);
    return p;
}

struct RandomInstance {
    SequenceDatabase db;
    MinerConfig cfg;
};

/// Small database within the oracle guard (<= 6 states, <= 25 patients,
/// <= 5 waves) and random thresholds.
inline RandomInstance random_instance(std::mt19937_64& rng) {
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const int waves = uni(2, 5);
    const int n_states = uni(2, 6);
    const int n_patients = uni(4, 25);
    const double density = std::uniform_real_distribution<double>(0.2, 0.7)(rng);

    std::vector<PatientIntervals> patients;
    for (int p = 0; p < n_patients; ++p) {
        std::vector<Iv> ivs;
        for (int s = 0; s < n_states; ++s) {
            const std::string feature(1, static_cast<char>('A' + s / 2));
            const std::string level = s % 2 ? "low" : "high";
            int w = 1;
            while (w <= waves) {
                if (std::bernoulli_distribution(density)(rng)) {
                    const int end = uni(w, waves);
                    ivs.push_back({feature, w, end, level, s % 2 ? Severity::low : Severity::high});
                    w = end + 2;
                } else {
                    ++w;
                }
            }
        }
        patients.push_back(patient("p" + std::to_string(p), false, std::move(ivs)));
    }
    for (auto& p : patients) p.outcome.event = std::bernoulli_distribution(0.4)(rng);
    patients[0].outcome.event = true;
    patients[1].outcome.event = false;

    // Two levels of one feature may not overlap in time; keep only the
    // intervals of the lower-numbered level where they clash.
    for (auto& p : patients) {
        std::vector<StateInterval> kept;
        for (const auto& iv : p.intervals) {
            bool clash = false;
            for (const auto& k : kept)
                if (k.feature == iv.feature && k.start <= iv.end && iv.start <= k.end) clash = true;
            if (!clash) kept.push_back(iv);
        }
        p.intervals = std::move(kept);
    }

    RandomInstance inst{database(patients), {}};
    inst.cfg.minsup = std::uniform_real_distribution<double>(0.02, 0.5)(rng);
    inst.cfg.minsup_scope = std::bernoulli_distribution(0.5)(rng) ? MinsupScope::event_group : MinsupScope::population;
    inst.cfg.risk_threshold = std::uniform_real_distribution<double>(0.3, 2.5)(rng);
    inst.cfg.measure = std::bernoulli_distribution(0.7)(rng) ? RiskMeasure::relative_risk : RiskMeasure::odds_ratio;
    if (std::bernoulli_distribution(0.3)(rng)) inst.cfg.max_length = static_cast<std::size_t>(uni(2, 6));
    return inst;
}

}  // namespace ctpm::test
