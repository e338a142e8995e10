#include "fairrep/tape.hpp"

#include <atomic>
#include <cmath>

#include "fairrep/error.hpp"

namespace fairrep {
namespace {

std::uint64_t next_tag() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

void add_into(Matrix& dst, const Matrix& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

Tape::Tape() : tag_(next_tag()) {}

Tape::Var Tape::push(Node node) {
  node.grad = Matrix(node.value.rows(), node.value.cols());
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1, tag_};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape_tag != tag_ || v.id >= nodes_.size()) {
    throw Error("tape: variable was not recorded on this tape");
  }
  return nodes_[v.id];
}

Tape::Var Tape::constant(Matrix value) {
  Node n{.op = Op::constant, .value = std::move(value)};
  return push(std::move(n));
}

Tape::Var Tape::param(ParamBlock& block) {
  Node n{.op = Op::param, .value = block.value, .block = &block};
  return push(std::move(n));
}

Tape::Var Tape::affine(Var w, Var b, Var x) {
  const Matrix& W = node(w).value;
  const Matrix& B = node(b).value;
  if (B.size() != W.rows()) {
    throw ShapeError("affine: bias " + B.shape_string() + " does not match W " + W.shape_string());
  }
  Node n{.op = Op::affine, .value = fairrep::affine(W, B.values(), node(x).value), .a = w.id, .b = b.id, .c = x.id};
  return push(std::move(n));
}

Tape::Var Tape::leaky_relu(Var x, double slope) {
  Node n{.op = Op::leaky_relu, .value = fairrep::leaky_relu(node(x).value, slope), .a = x.id, .k1 = slope};
  return push(std::move(n));
}

Tape::Var Tape::sigmoid(Var x) {
  Node n{.op = Op::sigmoid, .value = fairrep::sigmoid(node(x).value), .a = x.id};
  return push(std::move(n));
}

Tape::Var Tape::bce_with_logits(Var logits, std::span<const std::uint8_t> labels) {
  const Matrix& z = node(logits).value;
  if (z.cols() != 1) throw ShapeError("bce_with_logits: logits must be a column, got " + z.shape_string());
  const double loss = fairrep::bce_with_logits(z.values(), labels);
  Node n{.op = Op::bce, .value = Matrix(1, 1, loss), .a = logits.id};
  n.labels.assign(labels.begin(), labels.end());
  return push(std::move(n));
}

Tape::Var Tape::squared_error(Var target, Var reconstruction) {
  const double loss = fairrep::squared_error(node(target).value, node(reconstruction).value);
  Node n{.op = Op::squared_error, .value = Matrix(1, 1, loss), .a = target.id, .b = reconstruction.id};
  return push(std::move(n));
}

Tape::Var Tape::mean_rows(Var x, std::vector<std::size_t> rows) {
  const Matrix& v = node(x).value;
  if (rows.empty()) throw EmptyGroup("mean_rows: no rows selected");
  Matrix out(1, v.cols());
  for (std::size_t r : rows) {
    if (r >= v.rows()) throw ShapeError("mean_rows: row index out of range for " + v.shape_string());
    for (std::size_t j = 0; j < v.cols(); ++j) out(0, j) += v(r, j);
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (std::size_t j = 0; j < v.cols(); ++j) out(0, j) *= inv;
  Node n{.op = Op::mean_rows, .value = std::move(out), .a = x.id, .rows = std::move(rows)};
  return push(std::move(n));
}

Tape::Var Tape::abs(Var x) {
  const Matrix& v = node(x).value;
  Matrix out(v.rows(), v.cols());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::fabs(v[i]);
  Node n{.op = Op::abs, .value = std::move(out), .a = x.id};
  return push(std::move(n));
}

Tape::Var Tape::combine(Var x, double a, Var y, double b) {
  const Matrix& vx = node(x).value;
  const Matrix& vy = node(y).value;
  require_same_shape(vx, vy, "combine");
  Matrix out(vx.rows(), vx.cols());
  for (std::size_t i = 0; i < vx.size(); ++i) out[i] = a * vx[i] + b * vy[i];
  Node n{.op = Op::combine, .value = std::move(out), .a = x.id, .b = y.id, .k1 = a, .k2 = b};
  return push(std::move(n));
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

double Tape::scalar(Var v) const {
  const Matrix& m = node(v).value;
  if (m.size() != 1) throw ShapeError("tape scalar: node has shape " + m.shape_string());
  return m[0];
}

const Matrix& Tape::grad(Var v) const { return node(v).grad; }

void Tape::backward(Var root, double seed_grad) {
  const Node& r = node(root);
  if (r.value.size() != 1) throw ShapeError("backward: root must be scalar, got " + r.value.shape_string());
  for (auto& n : nodes_) n.grad.fill(0.0);
  nodes_[root.id].grad[0] = seed_grad;

  for (std::size_t idx = root.id + 1; idx-- > 0;) {
    Node& n = nodes_[idx];
    const Matrix& g = n.grad;
    switch (n.op) {
      case Op::constant:
        break;
      case Op::param:
        add_into(n.block->grad, g);
        break;
      case Op::affine: {
        Node& W = nodes_[n.a];
        Node& B = nodes_[n.b];
        Node& X = nodes_[n.c];
        const std::size_t rows = X.value.rows();
        const std::size_t in = W.value.cols();
        const std::size_t out = W.value.rows();
        for (std::size_t i = 0; i < rows; ++i) {
          for (std::size_t k = 0; k < out; ++k) {
            const double gk = g(i, k);
            if (gk == 0.0) continue;
            B.grad[k] += gk;
            for (std::size_t j = 0; j < in; ++j) {
              W.grad(k, j) += gk * X.value(i, j);
              X.grad(i, j) += gk * W.value(k, j);
            }
          }
        }
        break;
      }
      case Op::leaky_relu: {
        Node& X = nodes_[n.a];
        for (std::size_t i = 0; i < g.size(); ++i) X.grad[i] += X.value[i] >= 0 ? g[i] : n.k1 * g[i];
        break;
      }
      case Op::sigmoid: {
        Node& X = nodes_[n.a];
        for (std::size_t i = 0; i < g.size(); ++i) X.grad[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
        break;
      }
      case Op::bce: {
        Node& Z = nodes_[n.a];
        const double scale = g[0] / static_cast<double>(n.labels.size());
        for (std::size_t i = 0; i < n.labels.size(); ++i) {
          Z.grad[i] += scale * (fairrep::sigmoid(Z.value[i]) - static_cast<double>(n.labels[i]));
        }
        break;
      }
      case Op::squared_error: {
        Node& T = nodes_[n.a];
        Node& R = nodes_[n.b];
        const double scale = 2.0 * g[0] / static_cast<double>(T.value.rows());
        for (std::size_t i = 0; i < T.value.size(); ++i) {
          const double d = scale * (T.value[i] - R.value[i]);
          T.grad[i] += d;
          R.grad[i] -= d;
        }
        break;
      }
      case Op::mean_rows: {
        Node& X = nodes_[n.a];
        const double inv = 1.0 / static_cast<double>(n.rows.size());
        for (std::size_t r : n.rows) {
          for (std::size_t j = 0; j < X.value.cols(); ++j) X.grad(r, j) += inv * g(0, j);
        }
        break;
      }
      case Op::abs: {
        Node& X = nodes_[n.a];
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double v = X.value[i];
          if (v > 0) {
            X.grad[i] += g[i];
          } else if (v < 0) {
            X.grad[i] -= g[i];
          }
        }
        break;
      }
      case Op::combine: {
        Node& X = nodes_[n.a];
        Node& Y = nodes_[n.b];
        for (std::size_t i = 0; i < g.size(); ++i) {
          X.grad[i] += n.k1 * g[i];
          Y.grad[i] += n.k2 * g[i];
        }
        break;
      }
    }
  }
}

}  // namespace fairrep
