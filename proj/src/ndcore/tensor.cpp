#include "gmelab/tensor.hpp"

#include <cmath>
#include <string>

#include "gmelab/errors.hpp"
#include "gmelab/kernels.hpp"

namespace gmelab::nd {

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("tensor: " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " shape does not match " + std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::row_vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor(1, n, std::move(v));
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("tensor: ragged row list");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(r, c, std::move(data));
}

double Tensor::item() const {
  if (rows_ != 1 || cols_ != 1) {
    throw DimensionError("tensor: item() on a " + std::to_string(rows_) + "x" +
                         std::to_string(cols_) + " tensor");
  }
  return data_[0];
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::require_finite(std::string_view what) const {
  if (!all_finite()) throw NumericError("non-finite value in " + std::string(what));
}

Tensor Tensor::transposed() const {
  Tensor t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

Tensor Tensor::slice_rows(std::size_t first, std::size_t count) const {
  if (first + count > rows_) throw DimensionError("tensor: row slice out of range");
  return Tensor(count, cols_,
                std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(first * cols_),
                                    data_.begin() + static_cast<std::ptrdiff_t>((first + count) * cols_)));
}

Tensor Tensor::gather_rows(std::span<const std::size_t> index) const {
  Tensor out(index.size(), cols_);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= rows_) throw DimensionError("tensor: gather index out of range");
    const auto src = row(index[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b, bool transpose_a, bool transpose_b) {
  const std::size_t m = transpose_a ? a.cols() : a.rows();
  const std::size_t k = transpose_a ? a.rows() : a.cols();
  const std::size_t kb = transpose_b ? b.cols() : b.rows();
  const std::size_t n = transpose_b ? b.rows() : b.cols();
  if (k != kb) {
    throw DimensionError("matmul: inner dimensions " + std::to_string(k) + " and " +
                         std::to_string(kb) + " differ");
  }
  Tensor c(m, n);
  if (m == 0 || n == 0) return c;
  kernels::active().gemm(transpose_a ? kernels::Transpose::yes : kernels::Transpose::no,
                         transpose_b ? kernels::Transpose::yes : kernels::Transpose::no, m, n, k,
                         a.data(), a.cols(), b.data(), b.cols(), c.data(), c.cols());
  return c;
}

Tensor pairwise_sqdist(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) throw DimensionError("pairwise_sqdist: point dimensions differ");
  Tensor out(a.rows(), b.rows());
  if (out.empty()) return out;
  kernels::active().pairwise_sqdist(a.data(), a.rows(), b.data(), b.rows(), a.cols(), out.data());
  return out;
}

}  // namespace gmelab::nd
