#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace fairrep {

using Vector = std::vector<double>;
using BinaryVector = std::vector<std::uint8_t>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix column(std::span<const double> values);
  static Matrix row_vector(std::span<const double> values);
  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  Matrix select_rows(std::span<const std::size_t> idx) const;
  void fill(double v);

  std::string shape_string() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

bool same_shape(const Matrix& a, const Matrix& b);
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);
bool all_finite(const Matrix& m);

// 1 / (1 + exp(-x)), evaluated on whichever branch avoids overflow.
double sigmoid(double x);
double leaky_relu(double x, double slope);
// log(1 + exp(x)) without overflow.
double softplus(double x);

Matrix sigmoid(const Matrix& x);
Matrix leaky_relu(const Matrix& x, double slope);

// Rows of X mapped through W x + b. W is (out x in), b has `out` entries
// (any 1 x out / out x 1 matrix), X is (n x in); result is (n x out).
Matrix affine(const Matrix& W, std::span<const double> b, const Matrix& X);

// Mean over samples of log(1 + exp(-(2y-1) * logit)).
double bce_with_logits(std::span<const double> logits, std::span<const std::uint8_t> labels);

// Mean over rows of the squared Euclidean distance between X and Xhat.
double squared_error(const Matrix& X, const Matrix& Xhat);

// [X | s] with s appended as the last column.
Matrix append_column(const Matrix& X, std::span<const std::uint8_t> s);

}  // namespace fairrep
