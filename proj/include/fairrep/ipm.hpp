#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fairrep/matrix.hpp"
#include "fairrep/optimizer.hpp"

namespace fairrep {

// A member of the sigmoid class z -> sigmoid(theta . z + mu).
struct Discriminator {
  Vector theta;
  double mu = 0.0;

  std::size_t dim() const { return theta.size(); }
  double operator()(std::span<const double> z) const;

  friend bool operator==(const Discriminator&, const Discriminator&) = default;
};

// Representations split by sensitive group: z0 holds S = 0 rows, z1 holds S = 1 rows.
struct GroupedBatch {
  Matrix z0;
  Matrix z1;

  std::size_t dim() const { return z0.cols(); }
  void validate() const;  // EmptyGroup / ShapeError
};

enum class FairnessTarget { dp, eopp, eo };

std::string_view to_string(FairnessTarget t);
FairnessTarget parse_fairness_target(std::string_view name);

// |mean_{z0} sigmoid(theta.z + mu) - mean_{z1} sigmoid(theta.z + mu)|
double fair_gap(const Discriminator& disc, const GroupedBatch& batch);

struct GapGradient {
  double gap = 0.0;
  Vector theta;
  double mu = 0.0;
};

// fair_gap and its gradient in (theta, mu); the sign of |.| is taken as 0 at 0.
GapGradient fair_gap_gradient(const Discriminator& disc, const GroupedBatch& batch);

// `steps` plain gradient-ascent updates of (theta, mu) on fair_gap.
Discriminator ascend(Discriminator disc, const GroupedBatch& batch, double lr_adv, std::size_t steps);

// Discriminator stored as a 1 x (m + 1) parameter block [theta | mu] so that
// any configured optimizer can drive the ascent.
ParamBlock to_param_block(const Discriminator& disc);
Discriminator from_param_block(const ParamBlock& block);
void ascend(ParamBlock& psi, const GroupedBatch& batch, const OptimizerConfig& config, std::size_t steps);

// theta ~ U(-scale, scale)^m, mu ~ U(-scale, scale) from stream `restart` of `seed`.
Discriminator random_discriminator(std::size_t dim, std::uint64_t seed, std::uint64_t restart,
                                   double scale = 1.0);

struct SipmOptions {
  std::size_t restarts = 16;
  std::size_t steps = 200;
  // Wide starts spread the restarts over many halfspace directions; small
  // starts all drift to the mean-difference basin.
  double init_scale = 10.0;
  OptimizerConfig ascent = adam_config(0.5);
  std::uint64_t seed = 0;
};

// Maximum fair_gap over `restarts` random starts, each followed by ascent.
// Restart k always uses the same seed stream, so the result is nondecreasing
// in `restarts`. A lower bound on the supremum over the sigmoid class.
double estimate_sipm(const GroupedBatch& batch, const SipmOptions& options);
// Convenience form: default options with the ascent rate set to lr_adv.
double estimate_sipm(const GroupedBatch& batch, std::size_t restarts, double lr_adv, std::size_t steps,
                     std::uint64_t seed);

struct GridSpec {
  double theta_lo = -20.0;
  double theta_hi = 20.0;
  std::size_t theta_points = 801;
  double mu_lo = -20.0;
  double mu_hi = 20.0;
  std::size_t mu_points = 801;

  double theta_at(std::size_t k) const;
  double mu_at(std::size_t k) const;
  // Every point of this grid is a point of the refined one.
  GridSpec refined() const;
};

inline constexpr std::size_t kMaxOracleDim = 3;

// Maximum of the gap over the full Cartesian grid of (theta, mu). Uses
// interval bounds to skip theta boxes that cannot beat the incumbent, so it
// returns exactly the brute-force grid maximum. Throws DimensionTooLarge for m > 3.
double grid_oracle_sipm(const GroupedBatch& batch, const GridSpec& grid);

// Stratified groups for the fairness target: DP -> one batch split by s;
// EOpp -> one batch restricted to y = 0; EO -> batches for y = 0 and y = 1.
std::vector<GroupedBatch> conditional_batches(const Matrix& Z, std::span<const std::uint8_t> s,
                                              std::span<const std::uint8_t> y, FairnessTarget target);

struct StratumRows {
  std::vector<std::size_t> rows0;
  std::vector<std::size_t> rows1;
  bool empty() const { return rows0.empty() || rows1.empty(); }
};

std::vector<StratumRows> conditional_strata(std::span<const std::uint8_t> s, std::span<const std::uint8_t> y,
                                            FairnessTarget target);

namespace serial {

// Single-threaded references for the parallel kernels above.
double estimate_sipm(const GroupedBatch& batch, const SipmOptions& options);
double grid_oracle_sipm(const GroupedBatch& batch, const GridSpec& grid);

}  // namespace serial

}  // namespace fairrep
