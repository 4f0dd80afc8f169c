#pragma once
// Shared helpers for the unit tests: random fixtures and the central
// finite-difference oracle.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "gmelab/rng.hpp"
#include "gmelab/tensor.hpp"

namespace gmelab::testing {

inline nd::Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  nd::Tensor t(rows, cols);
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

// Orthogonal matrix by Gram-Schmidt on a Gaussian matrix.
inline nd::Tensor random_rotation(std::size_t dim, Rng& rng) {
  nd::Tensor q = random_tensor(dim, dim, rng);
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      double dot = 0.0;
      for (std::size_t r = 0; r < dim; ++r) dot += q(r, c) * q(r, p);
      for (std::size_t r = 0; r < dim; ++r) q(r, c) -= dot * q(r, p);
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < dim; ++r) norm += q(r, c) * q(r, c);
    for (std::size_t r = 0; r < dim; ++r) q(r, c) /= std::sqrt(norm);
  }
  return q;
}

inline std::vector<double> random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

// Exhaustive minimum of the mean matched cost over all n! permutations.
inline double brute_force_ot(const nd::Tensor& c) {
  std::vector<std::size_t> perm(c.rows());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += c(i, perm[i]);
    best = std::min(best, s / static_cast<double>(perm.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// (f(x + h v) - f(x - h v)) / 2h
inline double central_difference(const std::function<double(std::span<const double>)>& f,
                                  std::span<const double> x, std::span<const double> direction,
                                  double h = 1e-5) {
  std::vector<double> plus(x.begin(), x.end());
  std::vector<double> minus(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    plus[i] += h * direction[i];
    minus[i] -= h * direction[i];
  }
  return (f(plus) - f(minus)) / (2.0 * h);
}

inline double directional(std::span<const double> grad, std::span<const double> direction) {
  double s = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) s += grad[i] * direction[i];
  return s;
}

inline double relative_error(double a, double b, double floor = 1e-10) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace gmelab::testing
