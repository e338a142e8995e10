#include <gtest/gtest.h>

#include <cmath>

#include "fairrep/error.hpp"
#include "fairrep/random.hpp"
#include "fairrep/synth.hpp"
#include "fairrep/theory.hpp"
#include "oracle.hpp"

using namespace fairrep;

TEST(Witness, OneOneMatchesLinearSolve) {
  const MomentWitness w = vandermonde_witness(1, 1);
  EXPECT_EQ(w.lambdas, (std::vector<double>{-1, 0, 1}));
  const auto ref = oracle::witness_betas(1, 1);
  const std::vector<double> expect{-0.25, 0.0, 0.25};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(ref[i], expect[i], 1e-15);
    EXPECT_NEAR(w.betas[i], expect[i], 1e-15);
  }
}

TEST(Witness, ClosedFormAgreesWithOracleEverywhere) {
  for (int r = 2; r <= kMaxWitnessDegree; ++r) {
    for (int r1 = 1; r1 < r; ++r1) {
      const MomentWitness w = vandermonde_witness(r1, r - r1);
      const auto ref = oracle::witness_betas(r1, r - r1);
      const auto lib = vandermonde_solve(r1, r - r1);
      for (std::size_t i = 0; i < ref.size(); ++i) {
        const double scale = std::max(1.0, std::abs(ref[i]));
        EXPECT_NEAR(w.betas[i], ref[i], 1e-9 * scale) << r1 << "," << r - r1;
        EXPECT_NEAR(lib[i], ref[i], 1e-9 * scale) << r1 << "," << r - r1;
      }
      EXPECT_LT(w.abs_sum(), std::exp(r));
    }
  }
}

TEST(Witness, IdentityAtRandomPoints) {
  Rng rng(3);
  for (int r = 2; r <= kMaxWitnessDegree; ++r) {
    for (int r1 = 1; r1 < r; ++r1) {
      const MomentWitness w = vandermonde_witness(r1, r - r1);
      for (int k = 0; k < 20; ++k) {
        EXPECT_LT(witness_residual(w, uniform(rng, -2, 2), uniform(rng, -2, 2)), 1e-8);
      }
    }
  }
}

TEST(Witness, Guards) {
  EXPECT_THROW(vandermonde_witness(7, 6), DimensionTooLarge);
  EXPECT_FALSE(vandermonde_witness(7, 6, true).verified_range);
  EXPECT_THROW(vandermonde_witness(-1, 2), InputError);
}

TEST(MultiWitness, BaseCase) {
  const std::vector<int> e{1};
  const MultiWitness w = multivariate_witness(e);
  ASSERT_EQ(w.terms.size(), 1u);
  EXPECT_EQ(w.terms[0].beta, 1.0);
  EXPECT_EQ(w.terms[0].direction, (std::vector<double>{1.0}));
}

TEST(MultiWitness, IdentityAndBound) {
  Rng rng(5);
  for (std::vector<int> e : {std::vector<int>{1, 1}, {1, 1, 1}, {1, 1, 1, 1}, {2, 1}, {3, 2, 1}, {2, 2, 2, 2}}) {
    const MultiWitness w = multivariate_witness(e);
    int r = 0;
    for (int v : e) r += v;
    EXPECT_LE(w.abs_sum(), std::exp((e.size() - 1.0) * r));
    for (int k = 0; k < 20; ++k) {
      std::vector<double> z(e.size());
      for (auto& v : z) v = uniform(rng, -1.5, 1.5);
      double mono = 1;
      for (std::size_t j = 0; j < z.size(); ++j) mono *= std::pow(z[j], e[j]);
      EXPECT_NEAR(w.evaluate(z), mono, 1e-9 * std::max(1.0, w.abs_sum()));
      EXPECT_LT(witness_residual(w, z), 1e-6);
    }
  }
  EXPECT_THROW(multivariate_witness(std::vector<int>{1, 1, 1, 1, 1}), DimensionTooLarge);
  EXPECT_THROW(multivariate_witness(std::vector<int>{5, 4}), DimensionTooLarge);
}

TEST(MomentGap, Examples) {
  const GroupedBatch b{Matrix::column(std::vector<double>{0, 2}), Matrix::column(std::vector<double>{1, 1})};
  EXPECT_EQ(moment_gap(b, std::vector<int>{1}), 0.0);
  EXPECT_EQ(moment_gap(b, std::vector<int>{2}), 1.0);
  EXPECT_EQ(moment_gap(GroupedBatch{b.z0, b.z0}, std::vector<int>{3}), 0.0);
}

TEST(ProjectedCdfGap, Examples) {
  const GroupedBatch sep{Matrix::column(std::vector<double>{-2}), Matrix::column(std::vector<double>{2})};
  EXPECT_EQ(projected_cdf_gap(sep, 8, 21, 0), 1.0);
  const GroupedBatch same{Matrix(4, 2, 0.5), Matrix(4, 2, 0.5)};
  EXPECT_EQ(projected_cdf_gap(same, 8, 21, 0), 0.0);
}

TEST(ProjectedCdfGap, ParallelMatchesSerialAndMonotone) {
  Rng rng(9);
  std::normal_distribution<double> g;
  GroupedBatch b{Matrix(40, 3), Matrix(30, 3)};
  for (auto& v : b.z0.values()) v = g(rng);
  for (auto& v : b.z1.values()) v = g(rng) + 0.3;
  EXPECT_EQ(projected_cdf_gap(b, 64, 50, 1), serial::projected_cdf_gap(b, 64, 50, 1));
  EXPECT_GE(projected_cdf_gap(b, 64, 50, 1), projected_cdf_gap(b, 16, 50, 1));
}

TEST(Verify, SuitePassesAndMutationFails) {
  const auto ok = verify_suite({.seed = 0, .inject_failure = false, .quick = true});
  EXPECT_TRUE(all_passed(ok));
  for (const auto& r : ok) EXPECT_TRUE(r.passed) << r.check_id << " " << r.measured << " vs " << r.threshold;
  const auto bad = verify_suite({.seed = 0, .inject_failure = true, .quick = true});
  EXPECT_FALSE(all_passed(bad));
  bool identity_failed = false;
  for (const auto& r : bad)
    if (!r.passed && r.check_id.find("identity") != std::string::npos) identity_failed = true;
  EXPECT_TRUE(identity_failed);
  EXPECT_NE(verify_report_json(bad).find("\"fail\""), std::string::npos);
}

TEST(Synth, GroundTruth) {
  SynthSpec null;
  null.group_shift = 0;
  null.bias_s = 0;
  EXPECT_LT(synthetic_ground_truth(null, 200'000).bayes_dp, 0.01);
  EXPECT_GT(synthetic_ground_truth(SynthSpec{}, 200'000).bayes_dp, 0.3);
}

TEST(Synth, Deterministic) {
  SynthSpec s;
  s.n = 500;
  const auto a = generate_synthetic(s, 1000);
  const auto b = generate_synthetic(s, 1000);
  EXPECT_EQ(a.data, b.data);
  EXPECT_EQ(a.data.count(Split::test), 150u);
  s.seed = 1;
  EXPECT_NE(generate_synthetic(s, 1000).data.X, a.data.X);
  SynthSpec bad;
  bad.label_weights = {1, 2};
  EXPECT_THROW(bad.validate(), InputError);
}
