#include <string>

#include "gmelab/errors.hpp"
#include "gmelab/otcore.hpp"

namespace gmelab::ot {

namespace {

void require_metric_cost(const Cost& c, const char* where) {
  if (c.kind == CostKind::encoder_quadratic) {
    throw ContractError(std::string(where) + ": c_X and c_Y must be log_quadratic or quadratic_p");
  }
}

void require_square(const nd::Tensor& c, std::size_t n, const char* what) {
  if (c.rows() != n || c.cols() != n) {
    throw DimensionError(std::string(what) + " must be " + std::to_string(n) + " x " + std::to_string(n));
  }
}

}  // namespace

double gm_cost(const nd::Tensor& cx, const nd::Tensor& cy, std::span<const double> weights) {
  const std::size_t n = weights.size();
  require_square(cx, n, "gm_cost c_X");
  require_square(cy, n, "gm_cost c_Y");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = cx(i, j) - cy(i, j);
      row += weights[j] * d * d;
    }
    total += weights[i] * row;
  }
  return total;
}

double gm_cost(const PointMap& t, const measures::EmpiricalMeasure& mu, const Cost& cx, const Cost& cy) {
  require_metric_cost(cx, "gm_cost");
  require_metric_cost(cy, "gm_cost");
  if (mu.empty()) return 0.0;
  const nd::Tensor tx = t(mu.points());
  if (tx.rows() != mu.size()) throw DimensionError("gm_cost: map changed the number of points");
  return gm_cost(pairwise_cost(cx, mu.points(), mu.points()), pairwise_cost(cy, tx, tx), mu.weights());
}

nd::Var gme_minibatch(const nd::Tensor& x, nd::Var t, const Cost& cx, const Cost& cy) {
  require_metric_cost(cx, "gme_minibatch");
  require_metric_cost(cy, "gme_minibatch");
  const std::size_t m = x.rows();
  if (m < 2) throw ContractError("gme_minibatch: needs at least 2 points, got " + std::to_string(m));
  if (t.rows() != m) throw DimensionError("gme_minibatch: encoded batch has a different number of rows");

  nd::Tape& tape = t.tape();
  nd::Var d2 = nd::pairwise_sqdist(t);
  nd::Var cty;
  if (cy.kind == CostKind::log_quadratic) {
    cty = nd::log1p(d2);
  } else if (cy.p == 2.0) {
    cty = nd::scale(d2, 0.5);
  } else {
    throw ContractError("gme_minibatch: quadratic_p for c_Y is differentiable only at p = 2");
  }
  nd::Tensor off_diagonal(m, m, 1.0);
  for (std::size_t i = 0; i < m; ++i) off_diagonal(i, i) = 0.0;
  nd::Var diff = nd::sub(cty, tape.constant(pairwise_cost(cx, x, x)));
  nd::Var sq = nd::mul(nd::mul(diff, diff), off_diagonal);
  return nd::scale(nd::sum(sq), 1.0 / static_cast<double>(m * (m - 1)));
}

double gme_minibatch_value(const nd::Mlp& t, const nd::Tensor& x, const Cost& cx, const Cost& cy) {
  require_metric_cost(cx, "gme_minibatch");
  require_metric_cost(cy, "gme_minibatch");
  const std::size_t m = x.rows();
  if (m < 2) throw ContractError("gme_minibatch: needs at least 2 points, got " + std::to_string(m));
  const nd::Tensor tx = nd::mlp_forward(t, x);
  const nd::Tensor a = pairwise_cost(cx, x, x);
  const nd::Tensor b = pairwise_cost(cy, tx, tx);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const double d = a(i, j) - b(i, j);
      total += d * d;
    }
  }
  return total / static_cast<double>(m * (m - 1));
}

double gw_objective(const Coupling& coupling, const nd::Tensor& cx, const nd::Tensor& cy) {
  coupling.validate();
  const std::size_t n = coupling.plan.rows();
  const std::size_t k = coupling.plan.cols();
  require_square(cx, n, "gw_objective c_X");
  require_square(cy, k, "gw_objective c_Y");

  struct Entry {
    std::size_t i, j;
    double mass;
  };
  std::vector<Entry> support;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (coupling.plan(i, j) != 0.0) support.push_back({i, j, coupling.plan(i, j)});
    }
  }
  double total = 0.0;
  for (const Entry& a : support) {
    double row = 0.0;
    for (const Entry& b : support) {
      const double d = cx(a.i, b.i) - cy(a.j, b.j);
      row += b.mass * d * d;
    }
    total += a.mass * row;
  }
  return total;
}

}  // namespace gmelab::ot
