#include <gtest/gtest.h>

#include "ctpm/risk.hpp"

using namespace ctpm;

TEST(Risk, HandComputedTable) {
    const RiskStats s{8, 2, 12, 78};
    EXPECT_NEAR(relative_risk(s), 6.0, 1e-12);
    EXPECT_NEAR(odds_ratio(s), 26.0, 1e-12);
    EXPECT_EQ(risk(s, RiskMeasure::odds_ratio), odds_ratio(s));
}

TEST(Risk, NoAssociation) {
    const RiskStats s{2, 8, 18, 72};
    EXPECT_NEAR(relative_risk(s), 1.0, 1e-12);
    EXPECT_NEAR(odds_ratio(s), 1.0, 1e-12);
}

TEST(Risk, ZeroCellCorrection) {
    EXPECT_NEAR(relative_risk({5, 5, 0, 90}), 91.0, 1e-12);
    EXPECT_NEAR(odds_ratio({5, 0, 5, 90}), 181.0, 1e-12);
}

TEST(Risk, Undefined) {
    EXPECT_THROW(relative_risk({0, 0, 10, 90}), UndefinedRiskError);
    EXPECT_THROW(odds_ratio({10, 90, 0, 0}), UndefinedRiskError);
    EXPECT_FALSE(RiskStats({0, 0, 1, 1}).risk_defined());
}

TEST(Risk, Supports) {
    const RiskStats s = RiskStats::from_counts(8, 2, 20, 80);
    EXPECT_EQ(s, (RiskStats{8, 2, 12, 78}));
    EXPECT_DOUBLE_EQ(s.support_pop(), 0.1);
    EXPECT_DOUBLE_EQ(s.support_event(), 0.4);
}

TEST(Risk, MeasureNames) {
    EXPECT_EQ(parse_measure("rr"), RiskMeasure::relative_risk);
    EXPECT_EQ(parse_measure("or"), RiskMeasure::odds_ratio);
    EXPECT_EQ(to_string(RiskMeasure::odds_ratio), "or");
    EXPECT_THROW(parse_measure("hr"), ConfigError);
}
