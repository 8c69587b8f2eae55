#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "ctpm/encoding.hpp"
#include "ctpm/pattern.hpp"
#include "test_support.hpp"

using namespace ctpm;
using ctpm::test::Iv;
using ctpm::test::patient;

TEST(Encode, BmiRuns) {
    auto p = patient("p", false, {{"BMI", 1, 3, "Overweight", Severity::high}, {"BMI", 4, 4, "Obese", Severity::very_high}});
    p.intervals.push_back({"BMI", {"Normal weight", Severity::normal}, 5, 7});
    const auto symbols = symbols_for({p});
    ASSERT_EQ(symbols.size(), 2u);
    const auto seq = encode(p, symbols);
    const auto ovw = symbols.id("BMI", "Overweight"), obese = symbols.id("BMI", "Obese");
    ASSERT_EQ(seq.groups.size(), 3u);
    EXPECT_EQ(seq.groups[0].time, 1);
    EXPECT_EQ(seq.groups[0].endpoints, EndpointSet{start_of(ovw)});
    EXPECT_EQ(seq.groups[1].time, 3);
    EXPECT_EQ(seq.groups[1].endpoints, EndpointSet{finish_of(ovw)});
    EXPECT_EQ(seq.groups[2].time, 4);
    EXPECT_EQ(seq.groups[2].endpoints, (EndpointSet{start_of(obese), finish_of(obese)}));
}

TEST(Encode, NormalOnlyIsEmpty) {
    PatientIntervals p{"p", {7.0, false}, {{"BMI", {"Normal weight", Severity::normal}, 1, 7}}};
    EXPECT_TRUE(encode(p, symbols_for({p})).groups.empty());
}

TEST(Encode, IntraGroupOrder) {
    auto p = patient("p", false, {{"A", 1, 2, "high"}, {"B", 2, 2, "low", Severity::low}});
    const auto symbols = symbols_for({p});
    const auto a = symbols.id("A", "high"), b = symbols.id("B", "low");
    const auto seq = encode(p, symbols);
    ASSERT_EQ(seq.groups.size(), 2u);
    EXPECT_EQ(seq.groups[1].endpoints, (EndpointSet{start_of(b), finish_of(a), finish_of(b)}));
    EXPECT_TRUE(pairing_well_formed(seq));
}

TEST(Encode, OverlapRejected) {
    auto p = patient("p", false, {{"A", 1, 3}, {"A", 2, 4}});
    EXPECT_THROW(encode(p, symbols_for({p})), ValidationError);
}

TEST(Encode, DecodeIsLossless) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        auto inst = test::random_instance(rng);
        for (const auto& seq : inst.db.sequences) {
            ASSERT_TRUE(pairing_well_formed(seq));
            const auto back = decode(seq, inst.db.symbols);
            // Re-encoding the decoded intervals reproduces the sequence.
            PatientIntervals p{seq.patient_id, seq.outcome, back};
            ASSERT_EQ(encode(p, inst.db.symbols).groups.size(), seq.groups.size());
            for (std::size_t g = 0; g < seq.groups.size(); ++g) {
                ASSERT_EQ(encode(p, inst.db.symbols).groups[g].time, seq.groups[g].time);
                ASSERT_EQ(encode(p, inst.db.symbols).groups[g].endpoints, seq.groups[g].endpoints);
            }
        }
    }
}

TEST(Intervals, JsonRoundTrip) {
    AbstractedCohort c;
    c.wave_count = 4;
    c.warnings = {"w"};
    c.patients = {patient("p1", true, {{"A", 1, 2}}, 3.0), patient("p2", false, {}, 4.0)};
    const auto back = intervals_from_json(intervals_to_json(c));
    EXPECT_EQ(back.wave_count, 4);
    EXPECT_EQ(back.warnings, c.warnings);
    EXPECT_EQ(back.patients, c.patients);
    EXPECT_THROW(intervals_from_json(nlohmann::json::parse(R"({"patients":[{"patient_id":"x"}]})")), ParseError);
}

class CanonicalKey : public ::testing::Test {
protected:
    SymbolTable symbols{std::vector<Symbol>{{"A", "high", Severity::high}, {"B", "high", Severity::high}}};
    Endpoint a_s = start_of(0), a_f = finish_of(0), b_s = start_of(1), b_f = finish_of(1);
};

TEST_F(CanonicalKey, PermutedGroupsCollapse) {
    TemporalPattern p{{{a_s}, {b_s, a_f}, {b_f}}};
    TemporalPattern q{{{a_s}, {a_f, b_s}, {b_f}}};
    EXPECT_EQ(canonical_key(p, symbols), canonical_key(q, symbols));
    EXPECT_EQ(canonical_key(p, symbols), "(A=high+) (B=high+,A=high-) (B=high-)");
}

TEST_F(CanonicalKey, DistinctSymbols) {
    TemporalPattern p{{{a_s}, {a_f}}}, q{{{b_s}, {b_f}}};
    EXPECT_NE(canonical_key(p, symbols), canonical_key(q, symbols));
}

TEST_F(CanonicalKey, AllPermutationsOfTwoGroups) {
    std::set<std::string> keys;
    EndpointSet g1 = {a_s, b_s}, g2 = {a_f, b_f};
    std::sort(g1.begin(), g1.end(), GroupOrder{});
    std::sort(g2.begin(), g2.end(), GroupOrder{});
    do {
        do {
            keys.insert(canonical_key(TemporalPattern{{g1, g2}}, symbols));
        } while (std::next_permutation(g2.begin(), g2.end(), GroupOrder{}));
    } while (std::next_permutation(g1.begin(), g1.end(), GroupOrder{}));
    EXPECT_EQ(keys.size(), 1u);
}

TEST_F(CanonicalKey, EscapesSeparators) {
    SymbolTable odd{std::vector<Symbol>{{"a=b", "x,(y)", Severity::high}}};
    EXPECT_EQ(canonical_key(TemporalPattern{{{start_of(0)}, {finish_of(0)}}}, odd), "(a\\=b=x\\,\\(y\\)+) (a\\=b=x\\,\\(y\\)-)");
}

TEST_F(CanonicalKey, WellFormedness) {
    EXPECT_TRUE(well_formed(TemporalPattern{{{a_s}, {a_f}}}));
    EXPECT_FALSE(well_formed(TemporalPattern{{{a_f}}}));
    EXPECT_FALSE(well_formed(TemporalPattern{{{a_s}, {a_s}}}));
    EXPECT_FALSE(well_formed(TemporalPattern{{{a_s}, {}}}));
    EXPECT_FALSE(TemporalPattern{{{a_s}}}.closed());
    EXPECT_EQ(TemporalPattern({{{a_s, b_s}, {a_f}}}).length(), 3u);
}
