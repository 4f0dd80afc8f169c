#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace gmelab::nd {

// Dense row-major float-64 matrix.  Everything in the project is at most
// rank 2: batches are rows, features are columns, scalars are 1 x 1 and flat
// parameter vectors are 1 x n.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor(1, 1, v); }
  static Tensor row_vector(std::vector<double> v);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  std::vector<std::size_t> shape() const { return {rows_, cols_}; }
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  // Value of a 1 x 1 tensor; DimensionError otherwise.
  double item() const;

  bool all_finite() const;
  // Throws NumericError naming `what` if any entry is NaN/Inf.
  void require_finite(std::string_view what) const;

  Tensor transposed() const;
  // Rows [first, first + count).
  Tensor slice_rows(std::size_t first, std::size_t count) const;
  // Rows picked by index, in the given order.
  Tensor gather_rows(std::span<const std::size_t> index) const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// C = op(A) op(B) through the active kernel table.
Tensor matmul(const Tensor& a, const Tensor& b, bool transpose_a = false, bool transpose_b = false);

// n x k matrix of squared Euclidean distances between rows.
Tensor pairwise_sqdist(const Tensor& a, const Tensor& b);

}  // namespace gmelab::nd
