#include "fairrep/theory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fairrep/error.hpp"
#include "fairrep/metrics.hpp"
#include "fairrep/random.hpp"

namespace fairrep {
namespace {

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// e_k of the values, by the usual one-pass recurrence.
double elementary_symmetric(std::span<const double> v, int k) {
  std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
  e[0] = 1.0;
  for (double x : v) {
    for (int j = k; j >= 1; --j) e[static_cast<std::size_t>(j)] += x * e[static_cast<std::size_t>(j - 1)];
  }
  return e[static_cast<std::size_t>(k)];
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

Vector unit_direction(std::size_t dim, std::uint64_t seed, std::uint64_t k) {
  Rng rng(derive_seed(seed, k));
  std::normal_distribution<double> g(0.0, 1.0);
  Vector a(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : a) {
      x = g(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : a) x /= norm;
  return a;
}

Vector project(const Matrix& Z, const Vector& a) {
  Vector p(Z.rows());
  for (std::size_t i = 0; i < Z.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += Z(i, j) * a[j];
    p[i] = s;
  }
  return p;
}

double direction_gap(const GroupedBatch& batch, const Vector& a, std::size_t n_thresholds) {
  Vector p0 = project(batch.z0, a);
  Vector p1 = project(batch.z1, a);
  std::sort(p0.begin(), p0.end());
  std::sort(p1.begin(), p1.end());
  const double lo = std::min(p0.front(), p1.front());
  const double hi = std::max(p0.back(), p1.back());
  const double n0 = static_cast<double>(p0.size());
  const double n1 = static_cast<double>(p1.size());
  double best = 0.0;
  for (std::size_t k = 0; k < n_thresholds; ++k) {
    const double t = n_thresholds == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n_thresholds - 1);
    const double f0 = static_cast<double>(std::upper_bound(p0.begin(), p0.end(), t) - p0.begin()) / n0;
    const double f1 = static_cast<double>(std::upper_bound(p1.begin(), p1.end(), t) - p1.begin()) / n1;
    best = std::max(best, std::fabs(f0 - f1));
  }
  return best;
}

void check_cdf_args(const GroupedBatch& batch, std::size_t n_directions, std::size_t n_thresholds) {
  batch.validate();
  if (n_directions == 0 || n_thresholds == 0) throw InputError("projected_cdf_gap needs directions and thresholds");
}

}  // namespace

double MomentWitness::evaluate(double x, double y) const {
  double s = 0.0;
  for (std::size_t i = 0; i < betas.size(); ++i) s += betas[i] * ipow(x + lambdas[i] * y, degree());
  return s;
}

double MomentWitness::abs_sum() const {
  double s = 0.0;
  for (double b : betas) s += std::fabs(b);
  return s;
}

MomentWitness vandermonde_witness(int r1, int r2, bool allow_unverified) {
  if (r1 < 1 || r2 < 1) throw InputError("vandermonde_witness needs r1 >= 1 and r2 >= 1");
  const int r = r1 + r2;
  if (r > kMaxWitnessDegree && !allow_unverified) {
    throw DimensionTooLarge("witness degree " + std::to_string(r) + " exceeds " + std::to_string(kMaxWitnessDegree));
  }
  MomentWitness w{.r1 = r1, .r2 = r2, .verified_range = r <= kMaxWitnessDegree};
  for (int i = 0; i <= r; ++i) w.lambdas.push_back(-1.0 + 2.0 * i / r);
  const double c = binomial(r, r2);
  const double sign = r1 % 2 ? -1.0 : 1.0;
  for (int i = 0; i <= r; ++i) {
    std::vector<double> others;
    double denom = c;
    for (int j = 0; j <= r; ++j) {
      if (j == i) continue;
      others.push_back(w.lambdas[static_cast<std::size_t>(j)]);
      denom *= w.lambdas[static_cast<std::size_t>(i)] - w.lambdas[static_cast<std::size_t>(j)];
    }
    w.betas.push_back(sign * elementary_symmetric(others, r1) / denom);
  }
  return w;
}

std::vector<double> vandermonde_solve(int r1, int r2) {
  if (r1 < 1 || r2 < 1) throw InputError("vandermonde_solve needs r1 >= 1 and r2 >= 1");
  const int r = r1 + r2;
  const auto n = static_cast<std::size_t>(r + 1);
  // Row k: sum_i beta_i lambda_i^k = rhs_k.
  std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) A[k][i] = ipow(-1.0 + 2.0 * static_cast<double>(i) / r, static_cast<int>(k));
    A[k][n] = static_cast<int>(k) == r2 ? 1.0 / binomial(r, r2) : 0.0;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t row = col + 1; row < n; ++row) {
      if (std::fabs(A[row][col]) > std::fabs(A[piv][col])) piv = row;
    }
    std::swap(A[col], A[piv]);
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col) continue;
      const double f = A[row][col] / A[col][col];
      for (std::size_t j = col; j <= n; ++j) A[row][j] -= f * A[col][j];
    }
  }
  std::vector<double> beta(n);
  for (std::size_t i = 0; i < n; ++i) beta[i] = A[i][n] / A[i][i];
  return beta;
}

int MultiWitness::degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }

double MultiWitness::evaluate(std::span<const double> z) const {
  const int r = degree();
  double s = 0.0;
  for (const auto& t : terms) {
    double p = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) p += t.direction[j] * z[j];
    s += t.beta * ipow(p, r);
  }
  return s;
}

double MultiWitness::abs_sum() const {
  double s = 0.0;
  for (const auto& t : terms) s += std::fabs(t.beta);
  return s;
}

MultiWitness multivariate_witness(std::span<const int> exponents) {
  if (exponents.empty()) throw InputError("multivariate_witness needs at least one exponent");
  if (exponents.size() > kMaxMultiVars) {
    throw DimensionTooLarge("multivariate witness supports u <= " + std::to_string(kMaxMultiVars));
  }
  for (int e : exponents) {
    if (e < 1) throw InputError("multivariate_witness exponents must be >= 1");
  }
  const int r = std::accumulate(exponents.begin(), exponents.end(), 0);
  if (r > kMaxMultiDegree) {
    throw DimensionTooLarge("multivariate witness degree " + std::to_string(r) + " exceeds " +
                            std::to_string(kMaxMultiDegree));
  }
  MultiWitness w{.exponents = {exponents[0]}, .terms = {WitnessTerm{1.0, {1.0}}}};
  for (std::size_t u = 1; u < exponents.size(); ++u) {
    // prod_{j<u} z_j^{r_j} * z_u^{r_u}: the inner projection plays x, z_u plays y.
    const MomentWitness v = vandermonde_witness(w.degree(), exponents[u]);
    std::vector<WitnessTerm> next;
    for (const auto& t : w.terms) {
      for (std::size_t k = 0; k < v.betas.size(); ++k) {
        WitnessTerm nt{t.beta * v.betas[k], t.direction};
        nt.direction.push_back(v.lambdas[k]);
        next.push_back(std::move(nt));
      }
    }
    w.terms = std::move(next);
    w.exponents.push_back(exponents[u]);
  }
  return w;
}

double witness_residual(const MomentWitness& w, double x, double y) {
  const double target = ipow(x, w.r1) * ipow(y, w.r2);
  double scale = std::fabs(target);
  for (std::size_t i = 0; i < w.betas.size(); ++i) {
    scale = std::max(scale, std::fabs(w.betas[i] * ipow(x + w.lambdas[i] * y, w.degree())));
  }
  const double err = std::fabs(w.evaluate(x, y) - target);
  return scale > 0.0 ? err / scale : err;
}

double witness_residual(const MultiWitness& w, std::span<const double> z) {
  if (z.size() != w.exponents.size()) throw ShapeError("witness point has the wrong dimension");
  double target = 1.0;
  for (std::size_t j = 0; j < z.size(); ++j) target *= ipow(z[j], w.exponents[j]);
  const int r = w.degree();
  double scale = std::fabs(target);
  for (const auto& t : w.terms) {
    double p = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) p += t.direction[j] * z[j];
    scale = std::max(scale, std::fabs(t.beta * ipow(p, r)));
  }
  const double err = std::fabs(w.evaluate(z) - target);
  return scale > 0.0 ? err / scale : err;
}

double projected_cdf_gap(const GroupedBatch& batch, std::size_t n_directions, std::size_t n_thresholds,
                         std::uint64_t seed) {
  check_cdf_args(batch, n_directions, n_thresholds);
  double best = 0.0;
  const auto n = static_cast<std::ptrdiff_t>(n_directions);
#pragma omp parallel for reduction(max : best) schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const Vector a = unit_direction(batch.dim(), seed, static_cast<std::uint64_t>(k));
    best = std::max(best, direction_gap(batch, a, n_thresholds));
  }
  return best;
}

namespace serial {

double projected_cdf_gap(const GroupedBatch& batch, std::size_t n_directions, std::size_t n_thresholds,
                         std::uint64_t seed) {
  check_cdf_args(batch, n_directions, n_thresholds);
  double best = 0.0;
  for (std::size_t k = 0; k < n_directions; ++k) {
    best = std::max(best, direction_gap(batch, unit_direction(batch.dim(), seed, k), n_thresholds));
  }
  return best;
}

}  // namespace serial

double moment_gap(const GroupedBatch& batch, std::span<const int> exponents) {
  batch.validate();
  if (exponents.size() != batch.dim()) {
    throw ShapeError("moment_gap: " + std::to_string(exponents.size()) + " exponents for dimension " +
                     std::to_string(batch.dim()));
  }
  int total = 0;
  for (int e : exponents) {
    if (e < 0) throw InputError("moment_gap exponents must be >= 0");
    total += e;
  }
  if (total > kMaxMultiDegree) throw DimensionTooLarge("moment_gap supports |r|_1 <= 8");
  auto mean = [&](const Matrix& Z) {
    double s = 0.0;
    for (std::size_t i = 0; i < Z.rows(); ++i) {
      double p = 1.0;
      for (std::size_t j = 0; j < exponents.size(); ++j) p *= ipow(Z(i, j), exponents[j]);
      s += p;
    }
    return s / static_cast<double>(Z.rows());
  };
  return std::fabs(mean(batch.z0) - mean(batch.z1));
}

// ------------------------------------------------------------------ suite

namespace {

struct Suite {
  std::vector<CheckResult> out;

  // passes when measured <= threshold
  void at_most(std::string id, double measured, double threshold) {
    out.push_back({std::move(id), measured <= threshold, measured, threshold});
  }
  void at_least(std::string id, double measured, double threshold) {
    out.push_back({std::move(id), measured >= threshold, measured, threshold});
  }
  void above(std::string id, double measured, double threshold) {
    out.push_back({std::move(id), measured > threshold, measured, threshold});
  }
};

Matrix gaussian_rows(std::size_t n, std::size_t m, double shift, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix Z(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) Z(i, j) = g(rng) + (j == 0 ? shift : 0.0);
  }
  return Z;
}

Matrix uniform_rows(std::size_t n, std::size_t m, double lo, double hi, Rng& rng) {
  Matrix Z(n, m);
  for (double& v : Z.values()) v = uniform(rng, lo, hi);
  return Z;
}

double spearman(const Vector& a, const Vector& b) {
  auto ranks = [](const Vector& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    Vector r(v.size());
    for (std::size_t k = 0; k < idx.size();) {
      std::size_t e = k;
      while (e + 1 < idx.size() && v[idx[e + 1]] == v[idx[k]]) ++e;
      for (std::size_t t = k; t <= e; ++t) r[idx[t]] = 0.5 * static_cast<double>(k + e);
      k = e + 1;
    }
    return r;
  };
  const Vector ra = ranks(a);
  const Vector rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

std::string join(std::span<const int> v) {
  std::string s;
  for (int x : v) s += (s.empty() ? "" : "_") + std::to_string(x);
  return s;
}

void univariate_checks(Suite& s, const VerifyOptions& opt, Rng& rng) {
  for (int r = 2; r <= kMaxWitnessDegree; ++r) {
    for (int r1 = 1; r1 < r; ++r1) {
      MomentWitness w = vandermonde_witness(r1, r - r1);
      if (opt.inject_failure && r == 4 && r1 == 2) w.betas[1] = -w.betas[1];
      const std::string tag = "r" + std::to_string(r1) + "_" + std::to_string(r - r1);
      double worst = 0.0;
      for (int k = 0; k < 100; ++k) {
        worst = std::max(worst, witness_residual(w, uniform(rng, -1, 1), uniform(rng, -1, 1)));
      }
      s.at_most("witness.univariate.identity." + tag, worst, 1e-8);
      s.above("witness.univariate.bound." + tag, std::exp(r) - w.abs_sum(), 0.0);
      const std::vector<double> solved = vandermonde_solve(r1, r - r1);
      double diff = 0.0;
      for (std::size_t i = 0; i < solved.size(); ++i) diff = std::max(diff, std::fabs(solved[i] - w.betas[i]));
      s.at_most("witness.univariate.linear_solve." + tag, diff, 1e-8);
    }
  }
}

void multivariate_checks(Suite& s, Rng& rng) {
  // Every exponent vector with u <= 4 variables, entries >= 1 and total <= 8.
  std::vector<std::vector<int>> all{{}};
  std::vector<std::vector<int>> frontier{{}};
  for (std::size_t u = 1; u <= kMaxMultiVars; ++u) {
    std::vector<std::vector<int>> next;
    for (const auto& e : frontier) {
      const int used = std::accumulate(e.begin(), e.end(), 0);
      for (int k = 1; used + k <= kMaxMultiDegree; ++k) {
        auto f = e;
        f.push_back(k);
        next.push_back(f);
      }
    }
    frontier = next;
    all.insert(all.end(), next.begin(), next.end());
  }
  for (const auto& e : all) {
    if (e.size() < 2) continue;
    const MultiWitness w = multivariate_witness(e);
    double worst = 0.0;
    std::vector<double> z(e.size());
    for (int k = 0; k < 100; ++k) {
      for (double& v : z) v = uniform(rng, -1, 1);
      worst = std::max(worst, witness_residual(w, z));
    }
    const double u = static_cast<double>(e.size());
    s.at_most("witness.multivariate.identity." + join(e), worst, 1e-6);
    s.at_most("witness.multivariate.bound." + join(e), w.abs_sum(), std::exp((u - 1.0) * w.degree()));
  }
}

void proposition_checks(Suite& s, const VerifyOptions& opt, Rng& rng) {
  GridSpec coarse{.theta_points = 81, .mu_points = 81};
  SipmOptions est;
  est.seed = opt.seed;
  std::uniform_int_distribution<int> pick_m(1, 2);
  std::uniform_int_distribution<int> pick_n(2, 30);
  double worst_zero = 0.0;
  double worst_sep = 1.0;
  for (int k = 0; k < 50; ++k) {
    const auto m = static_cast<std::size_t>(pick_m(rng));
    const auto n = static_cast<std::size_t>(pick_n(rng));
    const Matrix Z = gaussian_rows(n, m, 0.0, rng);
    const GroupedBatch same{Z, Z};
    worst_zero = std::max({worst_zero, estimate_sipm(same, est), grid_oracle_sipm(same, coarse)});
    const GroupedBatch sep{uniform_rows(n, m, -1.5, -0.5, rng), uniform_rows(n + 1, m, 0.5, 1.5, rng)};
    worst_sep = std::min({worst_sep, estimate_sipm(sep, est), grid_oracle_sipm(sep, coarse)});
  }
  s.at_most("prop1.identical_groups.max_gap", worst_zero, 0.0);
  s.above("prop1.disjoint_support.min_gap", worst_sep, 0.5);
}

void oracle_checks(Suite& s, const VerifyOptions& opt, Rng& rng) {
  const GridSpec grid;
  SipmOptions est;
  est.seed = opt.seed;
  std::uniform_int_distribution<int> pick_m(1, 2);
  std::uniform_int_distribution<int> pick_n(5, 50);
  double worst = 1e300;
  for (int k = 0; k < 25; ++k) {
    const auto m = static_cast<std::size_t>(pick_m(rng));
    const double shift = uniform(rng, 0.0, 2.0);
    const GroupedBatch b{gaussian_rows(static_cast<std::size_t>(pick_n(rng)), m, 0.0, rng),
                         gaussian_rows(static_cast<std::size_t>(pick_n(rng)), m, shift, rng)};
    const double oracle = grid_oracle_sipm(b, grid);
    const double ratio = oracle > 0 ? estimate_sipm(b, est) / oracle : 1.0;
    worst = std::min(worst, ratio);
  }
  s.at_least("ipm.ascent_vs_grid_oracle.min_ratio", worst, 0.95);
}

void moment_checks(Suite& s, Rng& rng) {
  const GroupedBatch b{gaussian_rows(200, 2, 0.0, rng), gaussian_rows(150, 2, 0.7, rng)};
  const int e1[] = {1, 0};
  ScoredBatch scored;
  for (std::size_t i = 0; i < b.z0.rows(); ++i) {
    scored.logits.push_back(b.z0(i, 0));
    scored.s.push_back(0);
  }
  for (std::size_t i = 0; i < b.z1.rows(); ++i) {
    scored.logits.push_back(b.z1(i, 0));
    scored.s.push_back(1);
  }
  s.at_most("moment_gap.first_moment_matches_mdp",
            std::fabs(moment_gap(b, e1) - delta_mdp(scored, Squash::identity)), 1e-12);
}

void lemma_a1_checks(Suite& s, const VerifyOptions& opt, Rng& rng) {
  SipmOptions est;
  est.seed = opt.seed;
  const std::size_t n_corr = opt.quick ? 300 : 1000;
  Vector cdf, ipm;
  for (int k = 0; k <= 10; ++k) {
    const double shift = 0.2 * k;
    const GroupedBatch b{gaussian_rows(n_corr, 2, 0.0, rng), gaussian_rows(n_corr, 2, shift, rng)};
    cdf.push_back(projected_cdf_gap(b, 64, 64, opt.seed));
    ipm.push_back(estimate_sipm(b, est));
  }
  s.above("lemma_a1.spearman_cdf_vs_sipm", spearman(cdf, ipm), 0.9);

  const std::size_t n_mono = opt.quick ? 2000 : 10000;
  double prev_cdf = -1.0, prev_ipm = -1.0;
  double min_step_cdf = 1e300, min_step_ipm = 1e300;
  for (double shift : {0.0, 0.5, 1.0, 2.0}) {
    const GroupedBatch b{gaussian_rows(n_mono, 2, 0.0, rng), gaussian_rows(n_mono, 2, shift, rng)};
    const double c = projected_cdf_gap(b, 64, 64, opt.seed);
    const double i = estimate_sipm(b, est);
    if (prev_cdf >= 0) {
      min_step_cdf = std::min(min_step_cdf, c - prev_cdf);
      min_step_ipm = std::min(min_step_ipm, i - prev_ipm);
    }
    prev_cdf = c;
    prev_ipm = i;
  }
  s.above("lemma_a1.cdf_gap_increases_with_shift", min_step_cdf, 0.0);
  s.above("lemma_a1.sipm_increases_with_shift", min_step_ipm, 0.0);
}

}  // namespace

std::vector<CheckResult> verify_suite(const VerifyOptions& options) {
  Suite s;
  Rng rng(derive_seed(options.seed, 0x7e57));
  univariate_checks(s, options, rng);
  multivariate_checks(s, rng);
  proposition_checks(s, options, rng);
  oracle_checks(s, options, rng);
  moment_checks(s, rng);
  lemma_a1_checks(s, options, rng);
  return s.out;
}

bool all_passed(std::span<const CheckResult> results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

std::string verify_report_json(std::span<const CheckResult> results) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json j;
    j["check_id"] = r.check_id;
    j["status"] = r.passed ? "pass" : "fail";
    j["measured"] = std::isfinite(r.measured) ? nlohmann::ordered_json(r.measured) : nlohmann::ordered_json();
    j["threshold"] = r.threshold;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

}  // namespace fairrep
