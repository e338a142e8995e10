#include <gtest/gtest.h>

#include <cmath>

#include "fairrep/error.hpp"
#include "fairrep/metrics.hpp"

using namespace fairrep;

namespace {
ScoredBatch sb(Vector logits, BinaryVector s, BinaryVector y = {}) { return {std::move(logits), std::move(s), std::move(y)}; }
}  // namespace

TEST(DeltaDp, Examples) {
  EXPECT_NEAR(delta_dp(sb({1, -1, 1, 1}, {0, 0, 1, 1})), 0.5, 1e-12);
  EXPECT_EQ(delta_dp(sb({1, -1, -1, 1}, {0, 0, 1, 1})), 0.0);
  EXPECT_EQ(delta_dp(sb({-1, -2, -3, -4}, {0, 0, 1, 1})), 0.0);
  EXPECT_THROW(delta_dp(sb({1, 2}, {0, 0})), EmptyGroup);
}

TEST(DeltaMdp, Examples) {
  EXPECT_NEAR(delta_mdp(sb({0.2, 0.4, 0.5, 0.5}, {0, 0, 1, 1}), Squash::identity), 0.2, 1e-12);
  EXPECT_EQ(delta_mdp(sb({0.2, 0.4, 0.4, 0.2}, {0, 0, 1, 1})), 0.0);
  EXPECT_NEAR(delta_mdp(sb({0, std::log(3.0)}, {0, 1})), 0.25, 1e-12);
}

TEST(DeltaSdp, Examples) {
  const double l02 = std::log(0.2 / 0.8), l08 = std::log(0.8 / 0.2);
  EXPECT_NEAR(delta_sdp(sb({l02, l08}, {0, 1})), 60.0 / 99.0, 1e-12);
  EXPECT_EQ(delta_sdp(sb({0.3, -1, 0.3, -1}, {0, 0, 1, 1})), 0.0);
  // grid 999 approaches the L1 CDF distance 0.6
  EXPECT_LT(std::abs(delta_sdp(sb({l02, l08}, {0, 1}), 99) - delta_sdp(sb({l02, l08}, {0, 1}), 999)), 0.02);
}

TEST(DeltaVdp, Examples) {
  EXPECT_NEAR(delta_vdp(sb({0, 2, 1, 1}, {0, 0, 1, 1})), 1.0, 1e-12);
  EXPECT_EQ(delta_vdp(sb({0, 2, 2, 0}, {0, 0, 1, 1})), 0.0);
  EXPECT_EQ(delta_vdp(sb({5, -3}, {0, 1})), 0.0);
}

TEST(Conditional, Examples) {
  const ScoredBatch all0 = sb({1, -1, 1, 1}, {0, 0, 1, 1}, {0, 0, 0, 0});
  EXPECT_EQ(group_conditional_gap(all0, FairnessTarget::eopp), delta_dp(all0));
  const ScoredBatch same = sb({1, -1, 1, -1}, {0, 0, 1, 1}, {1, 0, 1, 0});
  EXPECT_EQ(group_conditional_gap(same, FairnessTarget::eo), 0.0);
  // y=0 stratum: s0 logits {1, -1} rate 1/2, s1 logits {-1} rate 0 -> 0.5
  // y=1 stratum: s0 logits {1} rate 1, s1 logits {1, -1} rate 1/2 -> 0.5
  const ScoredBatch six = sb({1, -1, 1, -1, 1, -1}, {0, 0, 0, 1, 1, 1}, {0, 0, 1, 0, 1, 1});
  EXPECT_NEAR(group_conditional_gap(six, FairnessTarget::eopp), 0.5, 1e-12);
  EXPECT_NEAR(group_conditional_gap(six, FairnessTarget::eo), 1.0, 1e-12);
}

TEST(Accuracy, Examples) {
  EXPECT_EQ(accuracy(sb({1, -1}, {0, 1}, {1, 0})), 1.0);
  EXPECT_EQ(accuracy(sb({-1, 1}, {0, 1}, {1, 0})), 0.0);
  EXPECT_NEAR(accuracy(sb({1, -1, 1}, {0, 1, 0}, {1, 0, 0})), 2.0 / 3.0, 1e-15);
}

TEST(Report, JsonRoundTripAndCsv) {
  const FairnessReport r = evaluate(sb({1, -1, 1, -1, 1, -1}, {0, 0, 0, 1, 1, 1}, {0, 0, 1, 0, 1, 1}));
  EXPECT_EQ(report_from_json(report_json(r)), r);
  EXPECT_EQ(report_csv_header(), "acc,dp,mdp,sdp,vdp,eopp,eo");
  EXPECT_THROW(report_from_json("{"), InputError);
}

TEST(Report, EmptyStratumIsNan) {
  const FairnessReport r = evaluate(sb({1, -1}, {0, 1}, {1, 1}));
  EXPECT_TRUE(std::isnan(r.eopp));
}

TEST(Pareto, Examples) {
  const std::vector<ParetoPoint> one{{0.3, 0.7, 0}};
  EXPECT_EQ(pareto_front(one), one);
  const std::vector<ParetoPoint> dom{{0.1, 0.8, 0}, {0.2, 0.7, 1}};
  EXPECT_EQ(pareto_front(dom), (std::vector<ParetoPoint>{{0.1, 0.8, 0}}));
  const std::vector<ParetoPoint> inc{{0.2, 0.8, 1}, {0.1, 0.7, 0}};
  EXPECT_EQ(pareto_front(inc), (std::vector<ParetoPoint>{{0.1, 0.7, 0}, {0.2, 0.8, 1}}));
  const std::vector<ParetoPoint> dup{{0.1, 0.7, 0}, {0.1, 0.7, 1}};
  EXPECT_EQ(pareto_front(dup).size(), 1u);
}
