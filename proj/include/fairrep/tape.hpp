#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fairrep/matrix.hpp"
#include "fairrep/optimizer.hpp"

namespace fairrep {

// Records a forward pass over the fixed op set used by the encoder, decoder,
// prediction heads and the sigmoid discriminator, then replays it in reverse.
//
// Subgradient conventions: d|x|/dx = 0 at x = 0, and leaky_relu takes the
// positive branch (derivative 1) at 0.
class Tape {
 public:
  struct Var {
    std::size_t id = 0;
    std::uint64_t tape_tag = 0;
  };

  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  // Leaf bound to `block`; backward() accumulates into block.grad.
  Var param(ParamBlock& block);

  Var affine(Var w, Var b, Var x);
  Var leaky_relu(Var x, double slope);
  Var sigmoid(Var x);
  Var bce_with_logits(Var logits, std::span<const std::uint8_t> labels);
  Var squared_error(Var target, Var reconstruction);
  // 1 x cols mean over the listed rows.
  Var mean_rows(Var x, std::vector<std::size_t> rows);
  Var abs(Var x);
  // a * x + b * y for same-shaped operands.
  Var combine(Var x, double a, Var y, double b);

  const Matrix& value(Var v) const;
  double scalar(Var v) const;
  const Matrix& grad(Var v) const;

  // Reverse sweep from `root` (must be 1 x 1) seeded with `seed_grad`.
  void backward(Var root, double seed_grad = 1.0);

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op { constant, param, affine, leaky_relu, sigmoid, bce, squared_error, mean_rows, abs, combine };

  struct Node {
    Op op;
    Matrix value;
    Matrix grad;
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t c = 0;
    double k1 = 0.0;
    double k2 = 0.0;
    ParamBlock* block = nullptr;
    std::vector<std::size_t> rows;
    BinaryVector labels;
  };

  Var push(Node node);
  const Node& node(Var v) const;

  std::uint64_t tag_;
  std::vector<Node> nodes_;
};

}  // namespace fairrep
