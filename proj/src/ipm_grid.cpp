#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <string>
#include <vector>

#include "fairrep/error.hpp"
#include "fairrep/ipm.hpp"

namespace fairrep {

double GridSpec::theta_at(std::size_t k) const {
  if (theta_points <= 1) return theta_lo;
  return theta_lo + (theta_hi - theta_lo) * static_cast<double>(k) / static_cast<double>(theta_points - 1);
}

double GridSpec::mu_at(std::size_t k) const {
  if (mu_points <= 1) return mu_lo;
  return mu_lo + (mu_hi - mu_lo) * static_cast<double>(k) / static_cast<double>(mu_points - 1);
}

GridSpec GridSpec::refined() const {
  GridSpec g = *this;
  g.theta_points = theta_points <= 1 ? theta_points : 2 * theta_points - 1;
  g.mu_points = mu_points <= 1 ? mu_points : 2 * mu_points - 1;
  return g;
}

namespace {

// sigmoid(p + mu) written as 1 / (1 + exp(-p) * exp(-mu)) so that exp(-mu)
// is tabulated once per grid. Monotone in p, which the box bounds rely on.
struct GridKernel {
  const GroupedBatch& batch;
  const GridSpec& grid;
  std::size_t m;
  std::vector<double> exp_neg_mu;
  double inv0;
  double inv1;

  GridKernel(const GroupedBatch& b, const GridSpec& g)
      : batch(b),
        grid(g),
        m(b.dim()),
        exp_neg_mu(g.mu_points),
        inv0(1.0 / static_cast<double>(b.z0.rows())),
        inv1(1.0 / static_cast<double>(b.z1.rows())) {
    for (std::size_t k = 0; k < g.mu_points; ++k) exp_neg_mu[k] = std::exp(-g.mu_at(k));
  }

  // Per-row projection bounds over theta box [lo, hi] (grid indices, inclusive).
  void project(const Matrix& z, const std::array<std::size_t, kMaxOracleDim>& lo,
               const std::array<std::size_t, kMaxOracleDim>& hi, std::vector<double>& up,
               std::vector<double>& down) const {
    up.resize(z.rows());
    down.resize(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
      double u = 0.0;
      double d = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double a = grid.theta_at(lo[j]) * z(i, j);
        const double b = grid.theta_at(hi[j]) * z(i, j);
        u += std::max(a, b);
        d += std::min(a, b);
      }
      up[i] = std::exp(-u);
      down[i] = std::exp(-d);
    }
  }

  static double mean_sigmoid(const std::vector<double>& exp_neg_p, double exp_neg_mu, double inv) {
    double acc = 0.0;
    for (double e : exp_neg_p) acc += 1.0 / (1.0 + e * exp_neg_mu);
    return acc * inv;
  }

  // Upper bound of the gap over every (theta, mu) with theta in the box.
  // For a single-point box it is the exact maximum over mu.
  double box_value(const std::array<std::size_t, kMaxOracleDim>& lo,
                   const std::array<std::size_t, kMaxOracleDim>& hi) const {
    std::vector<double> up0, down0, up1, down1;
    project(batch.z0, lo, hi, up0, down0);
    project(batch.z1, lo, hi, up1, down1);
    double best = 0.0;
    for (std::size_t k = 0; k < grid.mu_points; ++k) {
      const double e = exp_neg_mu[k];
      const double hi0 = mean_sigmoid(up0, e, inv0);
      const double lo1 = mean_sigmoid(down1, e, inv1);
      const double hi1 = mean_sigmoid(up1, e, inv1);
      const double lo0 = mean_sigmoid(down0, e, inv0);
      best = std::max(best, std::max(hi0 - lo1, hi1 - lo0));
    }
    return best;
  }

  double point_value(const std::array<std::size_t, kMaxOracleDim>& idx) const { return box_value(idx, idx); }
};

void check_oracle_inputs(const GroupedBatch& batch, const GridSpec& grid) {
  batch.validate();
  if (batch.dim() > kMaxOracleDim) {
    throw DimensionTooLarge("grid oracle supports m <= 3, got m = " + std::to_string(batch.dim()));
  }
  if (batch.dim() == 0) throw ShapeError("grid oracle needs at least one representation dimension");
  if (grid.theta_points == 0 || grid.mu_points == 0) throw InputError("grid oracle needs nonempty axes");
}

void atomic_max(std::atomic<double>& target, double v) {
  double cur = target.load(std::memory_order_relaxed);
  while (v > cur && !target.compare_exchange_weak(cur, v, std::memory_order_relaxed)) {
  }
}

// Absorbs rounding differences between box bounds and point values.
constexpr double kPruneSlack = 1e-12;

struct Box {
  std::array<std::size_t, kMaxOracleDim> lo{};
  std::array<std::size_t, kMaxOracleDim> hi{};
};

void search_box(const GridKernel& kernel, Box root, std::atomic<double>& best) {
  const std::size_t m = kernel.m;
  std::vector<Box> stack{root};
  while (!stack.empty()) {
    Box box = stack.back();
    stack.pop_back();
    std::size_t widest = 0;
    std::size_t width = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t w = box.hi[j] - box.lo[j];
      if (w > width) {
        width = w;
        widest = j;
      }
    }
    if (width == 0) {
      atomic_max(best, kernel.point_value(box.lo));
      continue;
    }
    const double bound = kernel.box_value(box.lo, box.hi);
    if (bound < best.load(std::memory_order_relaxed) - kPruneSlack) continue;
    const std::size_t mid = box.lo[widest] + width / 2;
    Box left = box;
    Box right = box;
    left.hi[widest] = mid;
    right.lo[widest] = mid + 1;
    stack.push_back(left);
    stack.push_back(right);
  }
}

}  // namespace

double grid_oracle_sipm(const GroupedBatch& batch, const GridSpec& grid) {
  check_oracle_inputs(batch, grid);
  const GridKernel kernel(batch, grid);
  const std::size_t m = batch.dim();
  const std::size_t n = grid.theta_points;

  // Seed the incumbent from a coarse sub-grid so pruning starts early.
  std::atomic<double> best{0.0};
  const std::size_t stride = std::max<std::size_t>(1, n / 16);
  std::vector<std::size_t> coarse;
  for (std::size_t k = 0; k < n; k += stride) coarse.push_back(k);
  coarse.push_back(n - 1);
  std::array<std::size_t, kMaxOracleDim> idx{};
  std::size_t combos = 1;
  for (std::size_t j = 0; j < m; ++j) combos *= coarse.size();
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t rest = c;
    for (std::size_t j = 0; j < m; ++j) {
      idx[j] = coarse[rest % coarse.size()];
      rest /= coarse.size();
    }
    atomic_max(best, kernel.point_value(idx));
  }

  // Independent slabs along the first theta axis.
  const std::size_t slabs = std::min<std::size_t>(n, 64);
  std::vector<Box> roots(slabs);
  for (std::size_t k = 0; k < slabs; ++k) {
    Box b;
    for (std::size_t j = 0; j < m; ++j) b.hi[j] = n - 1;
    b.lo[0] = k * n / slabs;
    b.hi[0] = (k + 1) * n / slabs - 1;
    roots[k] = b;
  }
  const auto count = static_cast<std::ptrdiff_t>(roots.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < count; ++k) search_box(kernel, roots[static_cast<std::size_t>(k)], best);
  return best.load();
}

namespace serial {

double grid_oracle_sipm(const GroupedBatch& batch, const GridSpec& grid) {
  check_oracle_inputs(batch, grid);
  const GridKernel kernel(batch, grid);
  const std::size_t m = batch.dim();
  std::size_t total = 1;
  for (std::size_t j = 0; j < m; ++j) total *= grid.theta_points;
  double best = 0.0;
  std::array<std::size_t, kMaxOracleDim> idx{};
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rest = c;
    for (std::size_t j = 0; j < m; ++j) {
      idx[j] = rest % grid.theta_points;
      rest /= grid.theta_points;
    }
    best = std::max(best, kernel.point_value(idx));
  }
  return best;
}

}  // namespace serial

}  // namespace fairrep
