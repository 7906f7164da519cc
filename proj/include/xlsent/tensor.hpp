#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace xlsent {

// Dense row-major float64 matrix. Vectors (biases, norm gains) are 1 x n.
// All reductions run in a fixed order so results are reproducible.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double value) { data_.assign(data_.size(), value); }
  bool same_shape(const Matrix& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }
  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// out = a (m x k) * b (k x n)
Matrix matmul(const Matrix& a, const Matrix& b);
// out += a (m x k) * b^T (n x k)
void add_matmul_nt(Matrix& out, const Matrix& a, const Matrix& b);
// out += a^T (k x m) * b (k x n)
void add_matmul_tn(Matrix& out, const Matrix& a, const Matrix& b);
// out = a * b + broadcast bias row
Matrix affine(const Matrix& a, const Matrix& w, const Matrix& bias);

void check_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& what);

}  // namespace xlsent
