#include "fairrep/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "fairrep/error.hpp"

namespace fairrep {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string());
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged initializer for Matrix");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::row_vector(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
  Matrix out(idx.size(), cols_);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    auto src = row(idx[k]);
    std::copy(src.begin(), src.end(), out.row(k).begin());
  }
  return out;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::string Matrix::shape_string() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

bool same_shape(const Matrix& a, const Matrix& b) { return a.rows() == b.rows() && a.cols() == b.cols(); }

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (!same_shape(a, b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
}

bool all_finite(const Matrix& m) {
  return std::all_of(m.values().begin(), m.values().end(), [](double v) { return std::isfinite(v); });
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double leaky_relu(double x, double slope) { return x >= 0 ? x : slope * x; }

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Matrix sigmoid(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigmoid(x[i]);
  return out;
}

Matrix leaky_relu(const Matrix& x, double slope) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = leaky_relu(x[i], slope);
  return out;
}

Matrix affine(const Matrix& W, std::span<const double> b, const Matrix& X) {
  if (W.cols() != X.cols()) {
    throw ShapeError("affine: W " + W.shape_string() + " cannot act on X " + X.shape_string());
  }
  if (b.size() != W.rows()) {
    throw ShapeError("affine: bias length " + std::to_string(b.size()) + " does not match W " + W.shape_string());
  }
  const std::size_t n = X.rows();
  const std::size_t in = W.cols();
  const std::size_t out_dim = W.rows();
  Matrix out(n, out_dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = X.values().data() + i * in;
    double* o = out.values().data() + i * out_dim;
    for (std::size_t k = 0; k < out_dim; ++k) {
      const double* w = W.values().data() + k * in;
      double acc = b[k];
      for (std::size_t j = 0; j < in; ++j) acc += w[j] * x[j];
      o[k] = acc;
    }
  }
  return out;
}

double bce_with_logits(std::span<const double> logits, std::span<const std::uint8_t> labels) {
  if (logits.size() != labels.size()) {
    throw ShapeError("bce_with_logits: " + std::to_string(logits.size()) + " logits vs " +
                     std::to_string(labels.size()) + " labels");
  }
  if (logits.empty()) throw ShapeError("bce_with_logits: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double sign = labels[i] ? 1.0 : -1.0;
    total += softplus(-sign * logits[i]);
  }
  return total / static_cast<double>(logits.size());
}

double squared_error(const Matrix& X, const Matrix& Xhat) {
  require_same_shape(X, Xhat, "squared_error");
  if (X.rows() == 0) throw ShapeError("squared_error: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double d = X[i] - Xhat[i];
    total += d * d;
  }
  return total / static_cast<double>(X.rows());
}

Matrix append_column(const Matrix& X, std::span<const std::uint8_t> s) {
  if (s.size() != X.rows()) {
    throw ShapeError("append_column: " + std::to_string(s.size()) + " entries for " + X.shape_string());
  }
  Matrix out(X.rows(), X.cols() + 1);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    auto src = X.row(i);
    auto dst = out.row(i);
    std::copy(src.begin(), src.end(), dst.begin());
    dst[X.cols()] = static_cast<double>(s[i]);
  }
  return out;
}

}  // namespace fairrep
