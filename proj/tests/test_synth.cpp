#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "ctpm/synth.hpp"

using namespace ctpm;

namespace {

SynthConfig planted_config(std::size_t n, double event_rate, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.patients = n;
    cfg.event_rate = event_rate;
    cfg.seed = seed;
    cfg.planted.push_back(default_planted_pattern(0.6, 0.1));
    return cfg;
}

std::string csv_of(const RawCohort& c) {
    std::ostringstream d, o;
    write_cohort_csv(c, d);
    write_outcomes_csv(c, o);
    return d.str() + o.str();
}

}  // namespace

TEST(Synth, DeterministicPerSeed) {
    const auto a = generate(planted_config(150, 0.2, 5)), b = generate(planted_config(150, 0.2, 5));
    EXPECT_EQ(csv_of(a.cohort), csv_of(b.cohort));
    EXPECT_EQ(a.manifest.dump(), b.manifest.dump());
    EXPECT_NE(csv_of(a.cohort), csv_of(generate(planted_config(150, 0.2, 6)).cohort));
}

TEST(Synth, ManifestRiskMatchesItsCounts) {
    const auto r = generate(planted_config(200, 0.2, 1));
    const auto& p = r.manifest.at("planted").at(0);
    const RiskStats s{p.at("a").get<std::size_t>(), p.at("b").get<std::size_t>(), p.at("c").get<std::size_t>(),
                      p.at("d").get<std::size_t>()};
    EXPECT_EQ(s.total(), 200u);
    EXPECT_EQ(p.at("rr").get<double>(), relative_risk(s));
    EXPECT_EQ(p.at("key").get<std::string>(), "(F01=high+) (F02=low+,F01=high-) (F02=low-)");
}

TEST(Synth, CountsMatchReparsedCohort) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto r = generate(planted_config(300, 0.25, seed));
        std::ostringstream d, o;
        write_cohort_csv(r.cohort, d);
        write_outcomes_csv(r.cohort, o);
        std::istringstream din(d.str()), oin(o.str());
        const auto cohort = parse_cohort(din, oin, r.cohort.features, r.cohort.wave_count);
        const auto db = encode_cohort(abstract_cohort(cohort).patients);
        const auto pattern = pattern_from_intervals(default_planted_pattern().intervals, db.symbols);
        EXPECT_EQ(count_by_containment(db, pattern), r.truth[0].stats);
        EXPECT_GE(r.truth[0].stats.a, r.truth[0].injected_events);
        EXPECT_GE(r.truth[0].stats.b, r.truth[0].injected_non_events);
    }
}

TEST(Synth, CarrierFractionsWithinThreeSigma) {
    const auto r = generate(planted_config(1000, 0.3, 9));
    const double events = static_cast<double>(r.cohort.event_count());
    const double others = 1000.0 - events;
    auto within = [](double hits, double n, double p) {
        return std::abs(hits / n - p) <= 3.0 * std::sqrt(p * (1 - p) / n);
    };
    EXPECT_TRUE(within(static_cast<double>(r.truth[0].injected_events), events, 0.6));
    EXPECT_TRUE(within(static_cast<double>(r.truth[0].injected_non_events), others, 0.1));
    EXPECT_TRUE(within(events, 1000.0, 0.3));
}

TEST(Synth, ZeroNoiseRecoversPrefixOnly) {
    // Without noise only carriers show F01=high, so the full pattern has the
    // same risk as its prefix and strict risk pruning stops the growth there.
    SynthConfig cfg = planted_config(120, 0.3, 4);
    cfg.noise_rate = 0.0;
    cfg.planted[0].event_fraction = 0.8;
    cfg.planted[0].non_event_fraction = 0.0;
    const auto r = generate(cfg);
    const auto db = encode_cohort(abstract_cohort(r.cohort).patients);
    MinerConfig mc;
    mc.minsup = 0.01;
    mc.risk_threshold = 1.1;
    bool prefix = false, full = false;
    for (const auto& p : mine(db, mc)) {
        prefix = prefix || (p.key == "(F01=high+) (F01=high-)" && p.rr == r.truth[0].rr);
        full = full || p.key == r.truth[0].key;
    }
    EXPECT_TRUE(prefix);
    EXPECT_FALSE(full);
}

TEST(Synth, NoisyRecovery) {
    const auto r = generate(planted_config(400, 0.3, 4));
    const auto db = encode_cohort(abstract_cohort(r.cohort).patients);
    MinerConfig mc;
    mc.minsup = 0.05;
    mc.risk_threshold = 1.5;
    bool found = false;
    for (const auto& p : mine(db, mc)) found = found || p.key == r.truth[0].key;
    EXPECT_TRUE(found);
}

TEST(Synth, EventTimesAndCensoring) {
    const auto r = generate(planted_config(300, 0.4, 2));
    for (const auto& p : r.cohort.patients) {
        EXPECT_GE(p.outcome.time, 1.0);
        EXPECT_LE(p.outcome.time, 5.0);
        if (!p.outcome.event) {
            EXPECT_EQ(p.outcome.time, 5.0);
        }
    }
}

TEST(Synth, ConfigErrors) {
    SynthConfig cfg = planted_config(10, 0.2, 1);
    cfg.waves = 2;
    EXPECT_THROW(generate(cfg), ConfigError);
    cfg = planted_config(10, 1.5, 1);
    EXPECT_THROW(generate(cfg), ConfigError);
    cfg = planted_config(10, 0.2, 1);
    cfg.planted[0].intervals[0].level = "normal";
    EXPECT_THROW(generate(cfg), ConfigError);
    cfg = planted_config(10, 0.2, 1);
    cfg.features = 1;
    EXPECT_THROW(generate(cfg), ConfigError);
    cfg = planted_config(0, 0.2, 1);
    EXPECT_THROW(generate(cfg), ConfigError);
}
