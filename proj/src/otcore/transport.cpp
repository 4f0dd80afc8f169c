#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gmelab/errors.hpp"
#include "gmelab/otcore.hpp"

namespace gmelab::ot {

PointMap identity_map() {
  return [](const nd::Tensor& x) { return x; };
}

PointMap linear_map(const nd::Tensor& matrix) {
  return [matrix](const nd::Tensor& x) { return nd::matmul(x, matrix); };
}

PointMap network_map(const nd::Mlp& net) {
  return [net](const nd::Tensor& x) { return nd::mlp_forward(net, x); };
}

Cost Cost::quadratic(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ContractError("quadratic_p cost needs p >= 1");
  return {CostKind::quadratic_p, p, {}};
}

Cost Cost::encoder_quadratic(PointMap encoder) {
  if (!encoder) throw ContractError("encoder_quadratic cost needs an encoder");
  return {CostKind::encoder_quadratic, 2.0, std::move(encoder)};
}

double Cost::from_sqdist(double d2) const {
  switch (kind) {
    case CostKind::log_quadratic:
      return std::log1p(d2);
    case CostKind::quadratic_p:
      return p == 2.0 ? 0.5 * d2 : std::pow(d2, 0.5 * p) / p;
    case CostKind::encoder_quadratic:
      return 0.5 * d2;
  }
  return 0.0;
}

nd::Tensor pairwise_cost(const Cost& cost, const nd::Tensor& a, const nd::Tensor& b) {
  nd::Tensor d2;
  if (cost.kind == CostKind::encoder_quadratic) {
    const nd::Tensor ta = cost.encoder(a);
    if (ta.rows() != a.rows() || ta.cols() != b.cols()) {
      throw DimensionError("pairwise_cost: encoder output has " + std::to_string(ta.cols()) +
                           " columns, targets have " + std::to_string(b.cols()));
    }
    d2 = nd::pairwise_sqdist(ta, b);
  } else {
    if (a.cols() != b.cols()) {
      throw DimensionError("pairwise_cost: dims " + std::to_string(a.cols()) + " and " + std::to_string(b.cols()));
    }
    d2 = nd::pairwise_sqdist(a, b);
  }
  for (double& v : d2.values()) v = cost.from_sqdist(v);
  return d2;
}

void Coupling::validate(double tol) const {
  if (plan.rows() != row_weights.size() || plan.cols() != col_weights.size()) {
    throw DimensionError("coupling: plan shape does not match the marginals");
  }
  std::vector<double> rs(plan.rows(), 0.0), cs(plan.cols(), 0.0);
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    for (std::size_t j = 0; j < plan.cols(); ++j) {
      const double v = plan(i, j);
      if (!(v >= 0.0) || !std::isfinite(v)) throw ContractError("coupling: negative or non-finite mass");
      rs[i] += v;
      cs[j] += v;
    }
  }
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (std::abs(rs[i] - row_weights[i]) > tol) throw ContractError("coupling: row marginal violated at " + std::to_string(i));
  }
  for (std::size_t j = 0; j < cs.size(); ++j) {
    if (std::abs(cs[j] - col_weights[j]) > tol) throw ContractError("coupling: column marginal violated at " + std::to_string(j));
  }
}

Coupling Coupling::from_assignment(std::span<const std::size_t> assignment) {
  const std::size_t n = assignment.size();
  const double w = n ? 1.0 / static_cast<double>(n) : 0.0;
  Coupling c{nd::Tensor(n, n), std::vector<double>(n, w), std::vector<double>(n, w)};
  for (std::size_t i = 0; i < n; ++i) {
    if (assignment[i] >= n) throw ContractError("coupling: assignment index out of range");
    c.plan(i, assignment[i]) = w;
  }
  return c;
}

Coupling Coupling::diagonal(std::span<const double> weights) {
  const std::size_t n = weights.size();
  Coupling c{nd::Tensor(n, n), {weights.begin(), weights.end()}, {weights.begin(), weights.end()}};
  for (std::size_t i = 0; i < n; ++i) c.plan(i, i) = weights[i];
  return c;
}

double assignment_cost(const nd::Tensor& cost, std::span<const std::size_t> assignment) {
  if (assignment.size() != cost.rows()) throw DimensionError("assignment_cost: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) s += cost(i, assignment[i]);
  return s / static_cast<double>(assignment.size());
}

OtSolution exact_ot_uniform(const nd::Tensor& cost) {
  const std::size_t n = cost.rows();
  if (n == 0 || cost.cols() != n) {
    throw ContractError("exact_ot_uniform: needs a non-empty square cost matrix (equal-size uniform supports)");
  }
  cost.require_finite("exact_ot_uniform cost matrix");

  // Shortest augmenting paths with row/column potentials; 1-based with a
  // virtual column 0.  Strict comparisons keep the lowest index on ties.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  OtSolution sol;
  sol.cost = assignment_cost(cost, assignment);
  sol.coupling = Coupling::from_assignment(assignment);
  sol.assignment = std::move(assignment);
  return sol;
}

double wasserstein_p(const measures::EmpiricalMeasure& mu, const measures::EmpiricalMeasure& nu, double p) {
  if (mu.dim() != nu.dim()) throw DimensionError("wasserstein_p: measures live in different dimensions");
  if (mu.size() != nu.size() || !mu.is_uniform() || !nu.is_uniform()) {
    throw ContractError("wasserstein_p: needs equal-size uniform measures");
  }
  const Cost c = Cost::quadratic(p);
  const double mean_cost = exact_ot_uniform(pairwise_cost(c, mu.points(), nu.points())).cost;
  return std::pow(std::max(0.0, p * mean_cost), 1.0 / p);
}

}  // namespace gmelab::ot
