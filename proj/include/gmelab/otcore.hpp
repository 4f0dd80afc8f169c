#pragma once
// Ground costs, exact discrete optimal transport between equal-size uniform
// measures, Wasserstein-p, the Gromov-Monge embedding cost, GW objective
// evaluation and the c-cyclical-monotonicity checker.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gmelab/autodiff.hpp"
#include "gmelab/measures.hpp"
#include "gmelab/mlp.hpp"
#include "gmelab/tensor.hpp"

namespace gmelab::ot {

// Row-batched map: n x D in, n x d out.
using PointMap = std::function<nd::Tensor(const nd::Tensor&)>;

PointMap identity_map();
PointMap linear_map(const nd::Tensor& matrix);  // x -> x M, M is D x d
PointMap network_map(const nd::Mlp& net);       // captures a copy of the network

enum class CostKind { log_quadratic, quadratic_p, encoder_quadratic };

struct Cost {
  CostKind kind = CostKind::quadratic_p;
  double p = 2.0;     // quadratic_p only
  PointMap encoder;   // encoder_quadratic only

  // log(1 + |x - y|^2)
  static Cost log_quadratic() { return {CostKind::log_quadratic, 2.0, {}}; }
  // |x - y|^p / p
  static Cost quadratic(double p = 2.0);
  // |T(x) - y|^2 / 2
  static Cost encoder_quadratic(PointMap encoder);

  // Applies c to a matrix of squared distances (not valid for encoder_quadratic).
  double from_sqdist(double d2) const;
};

// Entry (i, j) = c(A_i, B_j).  encoder_quadratic pushes A through T first.
nd::Tensor pairwise_cost(const Cost& cost, const nd::Tensor& a, const nd::Tensor& b);

struct Coupling {
  nd::Tensor plan;                   // n x k, nonnegative
  std::vector<double> row_weights;   // n
  std::vector<double> col_weights;   // k

  // Marginals within `tol`; ContractError otherwise.
  void validate(double tol = 1e-9) const;
  // Permutation plan with mass 1/n at (i, assignment[i]).
  static Coupling from_assignment(std::span<const std::size_t> assignment);
  // Plan diag(w) between the support of mu and its image under a map.
  static Coupling diagonal(std::span<const double> weights);
};

struct OtSolution {
  double cost = 0.0;
  Coupling coupling;
  std::optional<std::vector<std::size_t>> assignment;  // row i -> column assignment[i]
};

// Mean matched cost of a permutation.
double assignment_cost(const nd::Tensor& cost, std::span<const std::size_t> assignment);

// Minimum mean matched cost over permutations (Hungarian method, O(n^3)).
// Equal-size uniform measures only; ContractError for non-square or empty input.
OtSolution exact_ot_uniform(const nd::Tensor& cost);

// (min over permutations of mean |x - y|^p)^(1/p).
double wasserstein_p(const measures::EmpiricalMeasure& mu, const measures::EmpiricalMeasure& nu, double p);

// sum_{i,j} w_i w_j (c_X(x_i, x_j) - c_Y(T x_i, T x_j))^2 over all ordered pairs.
double gm_cost(const PointMap& t, const measures::EmpiricalMeasure& mu, const Cost& cx, const Cost& cy);
// Same sum from precomputed cost matrices.
double gm_cost(const nd::Tensor& cx, const nd::Tensor& cy, std::span<const double> weights);

// Differentiable minibatch estimate: mean over the m(m-1) ordered off-diagonal
// pairs of (c_X(x_i, x_j) - c_Y(t_i, t_j))^2, where t = T(x) is taped.
// Supports log_quadratic and quadratic_p with p = 2.  ContractError if m < 2.
nd::Var gme_minibatch(const nd::Tensor& x, nd::Var t, const Cost& cx, const Cost& cy);
// Plain evaluation of the same U-statistic for a network T.
double gme_minibatch_value(const nd::Mlp& t, const nd::Tensor& x, const Cost& cx, const Cost& cy);

// sum pi_ij pi_i'j' (c_X(i, i') - c_Y(j, j'))^2; visits nonzero plan entries only.
double gw_objective(const Coupling& coupling, const nd::Tensor& cx, const nd::Tensor& cy);

struct CcmReport {
  bool is_ccm = true;
  double worst_violation = 0.0;   // max over tested sigma of sum c(x_i,y_i) - sum c(x_sigma(i),y_i)
  std::vector<std::size_t> witness;  // full permutation sigma of the worst violation; empty if none
  std::size_t cycles_tested = 0;
  std::size_t cycles_passed = 0;
};

inline constexpr double kCcmTolerance = 1e-9;
inline constexpr std::size_t kMaxCycleLength = 6;

// Every subset of the pairs (x_i, y_i) of size 2..max_cycle_len and every
// permutation of it.  `cost(i, j)` = c(x_i, y_j).
CcmReport ccm_check(const nd::Tensor& cost, std::size_t max_cycle_len, double tol = kCcmTolerance);
CcmReport ccm_check(const nd::Tensor& xs, const nd::Tensor& ys, const Cost& cost, std::size_t max_cycle_len,
                    double tol = kCcmTolerance);

}  // namespace gmelab::ot
