#include "fairrep/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairrep/error.hpp"
#include "fairrep/random.hpp"

namespace fairrep {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
  return acc;
}

double group_mean(const Discriminator& disc, const Matrix& z) {
  double acc = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) acc += disc(z.row(i));
  return acc / static_cast<double>(z.rows());
}

void require_dim(const Discriminator& disc, const GroupedBatch& batch) {
  if (disc.dim() != batch.dim()) {
    throw ShapeError("discriminator has dimension " + std::to_string(disc.dim()) + " but batch has " +
                     std::to_string(batch.dim()));
  }
}

}  // namespace

double Discriminator::operator()(std::span<const double> z) const { return sigmoid(dot(theta, z) + mu); }

void GroupedBatch::validate() const {
  if (z0.cols() != z1.cols()) {
    throw ShapeError("grouped batch column mismatch " + z0.shape_string() + " vs " + z1.shape_string());
  }
  if (z0.rows() == 0 || z1.rows() == 0) {
    throw EmptyGroup("grouped batch has an empty group (n0=" + std::to_string(z0.rows()) +
                     ", n1=" + std::to_string(z1.rows()) + ")");
  }
}

std::string_view to_string(FairnessTarget t) {
  switch (t) {
    case FairnessTarget::dp: return "DP";
    case FairnessTarget::eopp: return "EOpp";
    case FairnessTarget::eo: return "EO";
  }
  return "?";
}

FairnessTarget parse_fairness_target(std::string_view name) {
  if (name == "DP" || name == "dp") return FairnessTarget::dp;
  if (name == "EOpp" || name == "eopp") return FairnessTarget::eopp;
  if (name == "EO" || name == "eo") return FairnessTarget::eo;
  throw InputError("unknown fairness target '" + std::string(name) + "' (valid: DP, EOpp, EO)");
}

double fair_gap(const Discriminator& disc, const GroupedBatch& batch) {
  batch.validate();
  require_dim(disc, batch);
  return std::fabs(group_mean(disc, batch.z0) - group_mean(disc, batch.z1));
}

GapGradient fair_gap_gradient(const Discriminator& disc, const GroupedBatch& batch) {
  batch.validate();
  require_dim(disc, batch);
  const std::size_t m = disc.dim();
  GapGradient out;
  out.theta.assign(m, 0.0);

  // Per-group sums first, so identical groups give exactly equal means.
  struct Sums {
    double value = 0.0;
    Vector theta;
    double mu = 0.0;
  };
  auto accumulate = [&](const Matrix& z) {
    Sums s{0.0, Vector(m, 0.0), 0.0};
    for (std::size_t i = 0; i < z.rows(); ++i) {
      const auto row = z.row(i);
      const double sv = disc(row);
      s.value += sv;
      const double ds = sv * (1.0 - sv);
      for (std::size_t j = 0; j < m; ++j) s.theta[j] += ds * row[j];
      s.mu += ds;
    }
    const double n = static_cast<double>(z.rows());
    s.value /= n;
    for (double& t : s.theta) t /= n;
    s.mu /= n;
    return s;
  };
  const Sums s0 = accumulate(batch.z0);
  const Sums s1 = accumulate(batch.z1);
  const double diff = s0.value - s1.value;
  for (std::size_t j = 0; j < m; ++j) out.theta[j] = s0.theta[j] - s1.theta[j];
  out.mu = s0.mu - s1.mu;

  const double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
  for (double& g : out.theta) g *= sign;
  out.mu *= sign;
  out.gap = std::fabs(diff);
  return out;
}

Discriminator ascend(Discriminator disc, const GroupedBatch& batch, double lr_adv, std::size_t steps) {
  batch.validate();
  require_dim(disc, batch);
  for (std::size_t t = 0; t < steps; ++t) {
    const GapGradient g = fair_gap_gradient(disc, batch);
    for (std::size_t j = 0; j < disc.dim(); ++j) disc.theta[j] += lr_adv * g.theta[j];
    disc.mu += lr_adv * g.mu;
  }
  return disc;
}

ParamBlock to_param_block(const Discriminator& disc) {
  Matrix v(1, disc.dim() + 1);
  for (std::size_t j = 0; j < disc.dim(); ++j) v(0, j) = disc.theta[j];
  v(0, disc.dim()) = disc.mu;
  return ParamBlock(std::move(v));
}

Discriminator from_param_block(const ParamBlock& block) {
  const std::size_t m = block.value.cols() - 1;
  Discriminator d;
  d.theta.assign(block.value.values().begin(), block.value.values().begin() + static_cast<std::ptrdiff_t>(m));
  d.mu = block.value(0, m);
  return d;
}

void ascend(ParamBlock& psi, const GroupedBatch& batch, const OptimizerConfig& config, std::size_t steps) {
  batch.validate();
  if (psi.value.rows() != 1 || psi.value.cols() != batch.dim() + 1) {
    throw ShapeError("discriminator block " + psi.value.shape_string() + " does not fit batch dimension " +
                     std::to_string(batch.dim()));
  }
  for (std::size_t t = 0; t < steps; ++t) {
    const GapGradient g = fair_gap_gradient(from_param_block(psi), batch);
    for (std::size_t j = 0; j < batch.dim(); ++j) psi.grad(0, j) = g.theta[j];
    psi.grad(0, batch.dim()) = g.mu;
    optimizer_step(psi, config, Direction::ascend);
  }
}

Discriminator random_discriminator(std::size_t dim, std::uint64_t seed, std::uint64_t restart, double scale) {
  Rng rng(derive_seed(seed, restart));
  Discriminator d;
  d.theta.resize(dim);
  for (double& t : d.theta) t = uniform(rng, -scale, scale);
  d.mu = uniform(rng, -scale, scale);
  return d;
}

namespace {

double run_restart(const GroupedBatch& batch, const SipmOptions& options, std::size_t k) {
  ParamBlock psi = to_param_block(random_discriminator(batch.dim(), options.seed, k, options.init_scale));
  const std::size_t m = batch.dim();
  // Every visited iterate is a member of the class, so the best one is kept.
  double best = 0.0;
  for (std::size_t t = 0; t < options.steps; ++t) {
    const GapGradient g = fair_gap_gradient(from_param_block(psi), batch);
    best = std::max(best, g.gap);
    for (std::size_t j = 0; j < m; ++j) psi.grad(0, j) = g.theta[j];
    psi.grad(0, m) = g.mu;
    optimizer_step(psi, options.ascent, Direction::ascend);
  }
  return std::max(best, fair_gap(from_param_block(psi), batch));
}

}  // namespace

double estimate_sipm(const GroupedBatch& batch, const SipmOptions& options) {
  batch.validate();
  options.ascent.validate();
  const auto restarts = static_cast<std::ptrdiff_t>(options.restarts);
  std::vector<double> best(options.restarts, 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < restarts; ++k) {
    best[static_cast<std::size_t>(k)] = run_restart(batch, options, static_cast<std::size_t>(k));
  }
  return best.empty() ? 0.0 : *std::max_element(best.begin(), best.end());
}

double estimate_sipm(const GroupedBatch& batch, std::size_t restarts, double lr_adv, std::size_t steps,
                     std::uint64_t seed) {
  SipmOptions options;
  options.restarts = restarts;
  options.steps = steps;
  options.ascent.learning_rate = lr_adv;
  options.seed = seed;
  return estimate_sipm(batch, options);
}

namespace serial {

double estimate_sipm(const GroupedBatch& batch, const SipmOptions& options) {
  batch.validate();
  options.ascent.validate();
  double best = 0.0;
  for (std::size_t k = 0; k < options.restarts; ++k) best = std::max(best, run_restart(batch, options, k));
  return best;
}

}  // namespace serial

std::vector<StratumRows> conditional_strata(std::span<const std::uint8_t> s, std::span<const std::uint8_t> y,
                                            FairnessTarget target) {
  if (target != FairnessTarget::dp && y.size() != s.size()) {
    throw ShapeError("conditional_strata: " + std::to_string(s.size()) + " sensitive values vs " +
                     std::to_string(y.size()) + " labels");
  }
  auto split = [&](int label) {
    StratumRows st;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (label >= 0 && y[i] != label) continue;
      (s[i] ? st.rows1 : st.rows0).push_back(i);
    }
    return st;
  };
  switch (target) {
    case FairnessTarget::dp: return {split(-1)};
    case FairnessTarget::eopp: return {split(0)};
    case FairnessTarget::eo: return {split(0), split(1)};
  }
  return {};
}

std::vector<GroupedBatch> conditional_batches(const Matrix& Z, std::span<const std::uint8_t> s,
                                              std::span<const std::uint8_t> y, FairnessTarget target) {
  if (s.size() != Z.rows()) {
    throw ShapeError("conditional_batches: " + std::to_string(s.size()) + " sensitive values for " +
                     Z.shape_string());
  }
  std::vector<GroupedBatch> out;
  for (const auto& st : conditional_strata(s, y, target)) {
    out.push_back(GroupedBatch{Z.select_rows(st.rows0), Z.select_rows(st.rows1)});
  }
  return out;
}

}  // namespace fairrep
