#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairrep/ipm.hpp"

namespace fairrep {

inline constexpr int kMaxWitnessDegree = 12;
inline constexpr int kMaxMultiDegree = 8;
inline constexpr std::size_t kMaxMultiVars = 4;

// sum_i beta_i (x + lambda_i y)^r == x^r1 y^r2 with lambda_i = -1 + 2i/r.
struct MomentWitness {
  int r1 = 0;
  int r2 = 0;
  std::vector<double> lambdas;
  std::vector<double> betas;
  bool verified_range = true;  // false beyond kMaxWitnessDegree

  int degree() const { return r1 + r2; }
  double evaluate(double x, double y) const;
  double abs_sum() const;
};

// Closed form: beta_i = (-1)^r1 e_r1(lambda without i) / (C(r, r2) prod_{j != i}(lambda_i - lambda_j)).
// Throws DimensionTooLarge for r > kMaxWitnessDegree unless allow_unverified.
MomentWitness vandermonde_witness(int r1, int r2, bool allow_unverified = false);

// Solves sum_i beta_i lambda_i^k = [k == r2] / C(r, r2), k = 0..r, by Gaussian elimination.
std::vector<double> vandermonde_solve(int r1, int r2);

struct WitnessTerm {
  double beta = 0.0;
  std::vector<double> direction;  // entries in [-1, 1]
};

// sum beta (direction . z)^r == prod z_j^{r_j}, r = sum r_j.
struct MultiWitness {
  std::vector<int> exponents;
  std::vector<WitnessTerm> terms;

  int degree() const;
  double evaluate(std::span<const double> z) const;
  double abs_sum() const;
};

// Inductive pairwise composition of univariate witnesses. Guards: u <= 4, r <= 8.
MultiWitness multivariate_witness(std::span<const int> exponents);

// Relative residual of an identity at one point, scaled by the size of the
// summands so that points where the monomial is near zero stay meaningful.
double witness_residual(const MomentWitness& w, double x, double y);
double witness_residual(const MultiWitness& w, std::span<const double> z);

// max over directions a_k (k < n_directions) and n_thresholds evenly spaced t in
// [min, max] of the pooled projections of |F0(a.z <= t) - F1(a.z <= t)|.
// Direction k depends only on (seed, k), so the value is nondecreasing in n_directions.
double projected_cdf_gap(const GroupedBatch& batch, std::size_t n_directions, std::size_t n_thresholds,
                         std::uint64_t seed);

// |mean_0 prod z_j^{r_j} - mean_1 prod z_j^{r_j}|, |r|_1 <= 8.
double moment_gap(const GroupedBatch& batch, std::span<const int> exponents);

struct CheckResult {
  std::string check_id;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  bool inject_failure = false;  // corrupts one witness coefficient
  bool quick = false;           // smaller Monte-Carlo samples
};

std::vector<CheckResult> verify_suite(const VerifyOptions& options);
bool all_passed(std::span<const CheckResult> results);
std::string verify_report_json(std::span<const CheckResult> results);

namespace serial {
double projected_cdf_gap(const GroupedBatch& batch, std::size_t n_directions, std::size_t n_thresholds,
                         std::uint64_t seed);
}  // namespace serial

}  // namespace fairrep
