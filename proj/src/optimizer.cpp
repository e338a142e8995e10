#include "fairrep/optimizer.hpp"

#include <cmath>

#include "fairrep/error.hpp"

namespace fairrep {

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::adadelta: return "adadelta";
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::sgd: return "sgd";
  }
  return "?";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "adadelta") return OptimizerKind::adadelta;
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd") return OptimizerKind::sgd;
  throw InputError("unknown optimizer '" + std::string(name) + "' (valid: adadelta, adam, sgd)");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0)) throw InputError("optimizer learning_rate must be > 0");
  if (!(rho >= 0 && rho < 1)) throw InputError("optimizer rho must be in [0, 1)");
  if (!(eps > 0)) throw InputError("optimizer eps must be > 0");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw InputError("adam betas must be in [0, 1)");
  }
}

OptimizerConfig adam_config(double learning_rate) {
  OptimizerConfig c;
  c.kind = OptimizerKind::adam;
  c.learning_rate = learning_rate;
  c.eps = 1e-8;
  return c;
}

OptimizerConfig sgd_config(double learning_rate) {
  OptimizerConfig c;
  c.kind = OptimizerKind::sgd;
  c.learning_rate = learning_rate;
  return c;
}

ParamBlock::ParamBlock(Matrix v)
    : value(std::move(v)),
      grad(value.rows(), value.cols()),
      acc1(value.rows(), value.cols()),
      acc2(value.rows(), value.cols()) {}

void ParamBlock::reset_state() {
  acc1.fill(0.0);
  acc2.fill(0.0);
  steps = 0;
}

void optimizer_step(ParamBlock& block, const OptimizerConfig& config, Direction dir) {
  require_same_shape(block.value, block.grad, "optimizer_step");
  if (!same_shape(block.acc1, block.value)) block.acc1 = Matrix(block.value.rows(), block.value.cols());
  if (!same_shape(block.acc2, block.value)) block.acc2 = Matrix(block.value.rows(), block.value.cols());
  const double sign = dir == Direction::descend ? -1.0 : 1.0;
  const double lr = config.learning_rate;
  ++block.steps;
  auto& x = block.value.values();
  const auto& g = block.grad.values();
  auto& a1 = block.acc1.values();
  auto& a2 = block.acc2.values();
  switch (config.kind) {
    case OptimizerKind::sgd:
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += sign * lr * g[i];
      break;
    case OptimizerKind::adadelta:
      for (std::size_t i = 0; i < x.size(); ++i) {
        a1[i] = config.rho * a1[i] + (1.0 - config.rho) * g[i] * g[i];
        const double delta = std::sqrt(a2[i] + config.eps) / std::sqrt(a1[i] + config.eps) * g[i];
        a2[i] = config.rho * a2[i] + (1.0 - config.rho) * delta * delta;
        x[i] += sign * lr * delta;
      }
      break;
    case OptimizerKind::adam: {
      const double t = static_cast<double>(block.steps);
      const double c1 = 1.0 - std::pow(config.beta1, t);
      const double c2 = 1.0 - std::pow(config.beta2, t);
      for (std::size_t i = 0; i < x.size(); ++i) {
        a1[i] = config.beta1 * a1[i] + (1.0 - config.beta1) * g[i];
        a2[i] = config.beta2 * a2[i] + (1.0 - config.beta2) * g[i] * g[i];
        const double mhat = a1[i] / c1;
        const double vhat = a2[i] / c2;
        x[i] += sign * lr * mhat / (std::sqrt(vhat) + config.eps);
      }
      break;
    }
  }
}

}  // namespace fairrep
