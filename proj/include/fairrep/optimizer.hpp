#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "fairrep/matrix.hpp"

namespace fairrep {

enum class OptimizerKind { adadelta, adam, sgd };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adadelta;
  double learning_rate = 2.0;
  double rho = 0.9;  // adadelta decay
  double eps = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;

  void validate() const;
};

OptimizerConfig adam_config(double learning_rate);
OptimizerConfig sgd_config(double learning_rate);

// A trainable parameter with its gradient and optimizer accumulators.
// For adadelta `acc1` is the running E[g^2] and `acc2` the running E[dx^2];
// for adam they are the first and second moment estimates.
struct ParamBlock {
  Matrix value;
  Matrix grad;
  Matrix acc1;
  Matrix acc2;
  std::uint64_t steps = 0;

  ParamBlock() = default;
  explicit ParamBlock(Matrix v);

  void zero_grad() { grad.fill(0.0); }
  void reset_state();
};

enum class Direction { descend, ascend };

// One update of `block` from its current grad. Ascent flips the sign of the step.
void optimizer_step(ParamBlock& block, const OptimizerConfig& config, Direction dir = Direction::descend);

}  // namespace fairrep
