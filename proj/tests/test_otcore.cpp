#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "gmelab/errors.hpp"
#include "gmelab/otcore.hpp"
#include "test_support.hpp"

using namespace gmelab;
using namespace gmelab::ot;
using gmelab::measures::EmpiricalMeasure;
using gmelab::testing::brute_force_ot;
using gmelab::testing::random_rotation;
using gmelab::testing::random_tensor;

namespace {

double naive_cost(const Cost& c, std::span<const double> x, std::span<const double> y) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) d2 += (x[k] - y[k]) * (x[k] - y[k]);
  if (c.kind == CostKind::log_quadratic) return std::log(1.0 + d2);
  return std::pow(std::sqrt(d2), c.p) / c.p;
}

// Four nested sums straight from the definition.
double naive_gw(const nd::Tensor& plan, const nd::Tensor& cx, const nd::Tensor& cy) {
  double s = 0.0;
  for (std::size_t i = 0; i < plan.rows(); ++i)
    for (std::size_t j = 0; j < plan.cols(); ++j)
      for (std::size_t i2 = 0; i2 < plan.rows(); ++i2)
        for (std::size_t j2 = 0; j2 < plan.cols(); ++j2) {
          const double d = cx(i, i2) - cy(j, j2);
          s += plan(i, j) * plan(i2, j2) * d * d;
        }
  return s;
}

nd::Tensor translated(const nd::Tensor& x, std::span<const double> v) {
  nd::Tensor out = x;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) += v[j];
  return out;
}

}  // namespace

TEST(PairwiseCost, HandValues) {
  const auto x = nd::Tensor::from_rows({{0.0, 0.0}});
  const auto y = nd::Tensor::from_rows({{3.0, 4.0}});
  EXPECT_EQ(pairwise_cost(Cost::quadratic(2.0), x, y).item(), 12.5);
  EXPECT_EQ(pairwise_cost(Cost::log_quadratic(), y, y).item(), 0.0);
  const auto z = nd::Tensor::from_rows({{std::sqrt(std::numbers::e - 1.0), 0.0}});
  EXPECT_NEAR(pairwise_cost(Cost::log_quadratic(), x, z).item(), 1.0, 1e-15);
  EXPECT_THROW(pairwise_cost(Cost::quadratic(), x, nd::Tensor(1, 3)), DimensionError);
  EXPECT_THROW(Cost::quadratic(0.5), ContractError);
}

TEST(PairwiseCost, MatchesPointwiseDefinition) {
  Rng rng(11);
  const auto a = random_tensor(5, 3, rng);
  const auto b = random_tensor(4, 3, rng);
  for (const Cost& c : {Cost::log_quadratic(), Cost::quadratic(1.0), Cost::quadratic(2.0), Cost::quadratic(3.5)}) {
    const auto m = pairwise_cost(c, a, b);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(m(i, j), naive_cost(c, a.row(i), b.row(j)), 1e-12);
  }
  const auto lin = nd::Tensor::from_rows({{2.0, 0.0}, {0.0, 1.0}, {1.0, -1.0}});
  const auto enc = pairwise_cost(Cost::encoder_quadratic(linear_map(lin)), a, random_tensor(4, 2, rng));
  EXPECT_EQ(enc.rows(), 5u);
  EXPECT_EQ(enc.cols(), 4u);
  EXPECT_THROW(pairwise_cost(Cost::encoder_quadratic(linear_map(lin)), a, b), DimensionError);
}

TEST(PairwiseCost, LogCostSymmetricWithZeroDiagonal) {
  Rng rng(2);
  const auto a = random_tensor(6, 4, rng);
  const auto m = pairwise_cost(Cost::log_quadratic(), a, a);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(m(i, i), 0.0);
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(m(i, j), m(j, i));
  }
}

TEST(ExactOt, SinglePointAndLineExample) {
  const auto one = exact_ot_uniform(nd::Tensor::from_rows({{3.25}}));
  EXPECT_EQ(one.cost, 3.25);
  EXPECT_EQ(*one.assignment, std::vector<std::size_t>{0});

  const auto mu = nd::Tensor::from_rows({{0.0}, {1.0}});
  const auto nu = nd::Tensor::from_rows({{0.1}, {0.9}});
  const auto sol = exact_ot_uniform(pairwise_cost(Cost::quadratic(2.0), mu, nu));
  EXPECT_EQ(*sol.assignment, (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(sol.cost, 0.005, 1e-15);
  sol.coupling.validate();
}

TEST(ExactOt, HungarianEqualsPermutationEnumeration) {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 8;
    const std::size_t dim = 1 + trial % 3;
    const auto c = pairwise_cost(Cost::quadratic(1.0 + (trial % 3) * 0.5), random_tensor(n, dim, rng),
                                 random_tensor(n, dim, rng));
    const auto sol = exact_ot_uniform(c);
    EXPECT_NEAR(sol.cost, brute_force_ot(c), 1e-12) << "trial " << trial;
    EXPECT_NEAR(sol.cost, assignment_cost(c, *sol.assignment), 1e-15);
    sol.coupling.validate(1e-9);
  }
}

TEST(ExactOt, TiesAndIntegerCosts) {
  EXPECT_EQ(exact_ot_uniform(nd::Tensor(5, 5, 2.0)).cost, 2.0);
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    nd::Tensor c(6, 6);
    for (double& v : c.values()) v = static_cast<double>(rng.index(4));
    EXPECT_NEAR(exact_ot_uniform(c).cost, brute_force_ot(c), 1e-12);
  }
}

TEST(ExactOt, ContractErrors) {
  EXPECT_THROW(exact_ot_uniform(nd::Tensor(2, 3)), ContractError);
  EXPECT_THROW(exact_ot_uniform(nd::Tensor()), ContractError);
  nd::Tensor bad(2, 2);
  bad(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(exact_ot_uniform(bad), NumericError);
}

TEST(ExactOt, LargeInstanceHasNoImprovingSwap) {
  Rng rng(7);
  const auto c = pairwise_cost(Cost::quadratic(2.0), random_tensor(60, 4, rng), random_tensor(60, 4, rng));
  const auto sol = exact_ot_uniform(c);
  const auto& a = *sol.assignment;
  for (std::size_t i = 0; i < 60; ++i)
    for (std::size_t j = i + 1; j < 60; ++j) {
      EXPECT_LE(c(i, a[i]) + c(j, a[j]), c(i, a[j]) + c(j, a[i]) + 1e-12);
    }
}

TEST(Wasserstein, BasicValues) {
  Rng rng(1);
  const auto mu = EmpiricalMeasure::uniform(random_tensor(7, 3, rng));
  EXPECT_EQ(wasserstein_p(mu, mu, 2.0), 0.0);
  const auto a = EmpiricalMeasure::uniform(nd::Tensor::from_rows({{0.0, 0.0}}));
  const auto b = EmpiricalMeasure::uniform(nd::Tensor::from_rows({{3.0, 4.0}}));
  EXPECT_NEAR(wasserstein_p(a, b, 2.0), 5.0, 1e-15);
  EXPECT_NEAR(wasserstein_p(a, b, 1.0), 5.0, 1e-15);
  EXPECT_NEAR(wasserstein_p(a, b, 3.0), 5.0, 1e-13);
  EXPECT_THROW(wasserstein_p(a, EmpiricalMeasure::uniform(nd::Tensor(2, 2)), 2.0), ContractError);
  EXPECT_THROW(wasserstein_p(a, EmpiricalMeasure::uniform(nd::Tensor(1, 3)), 2.0), DimensionError);
}

TEST(Wasserstein, MetricProperties) {
  Rng rng(55);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const double p = trial % 2 ? 1.0 : 2.0;
    const auto x = random_tensor(n, 2, rng), y = random_tensor(n, 2, rng), z = random_tensor(n, 2, rng);
    const auto mx = EmpiricalMeasure::uniform(x), my = EmpiricalMeasure::uniform(y), mz = EmpiricalMeasure::uniform(z);
    const double xy = wasserstein_p(mx, my, p);
    EXPECT_NEAR(xy, wasserstein_p(my, mx, p), 1e-12);
    EXPECT_LE(wasserstein_p(mx, mz, p), xy + wasserstein_p(my, mz, p) + 1e-9);
    const std::vector<double> v{rng.normal() * 3, rng.normal() * 3};
    EXPECT_NEAR(wasserstein_p(EmpiricalMeasure::uniform(translated(x, v)), EmpiricalMeasure::uniform(translated(y, v)), p),
                xy, 1e-12);
    // A reordered copy is the same multiset.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::reverse(order.begin(), order.end());
    EXPECT_EQ(wasserstein_p(mx, EmpiricalMeasure::uniform(x.gather_rows(order)), p), 0.0);
    EXPECT_GT(xy, 0.0);
  }
}

TEST(GmCost, IsometriesCostNothing) {
  Rng rng(9);
  const auto mu = EmpiricalMeasure::uniform(random_tensor(12, 3, rng));
  EXPECT_EQ(gm_cost(identity_map(), mu, Cost::log_quadratic(), Cost::log_quadratic()), 0.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto q = random_rotation(3, rng);
    EXPECT_LE(gm_cost(linear_map(q), mu, Cost::log_quadratic(), Cost::log_quadratic()), 1e-12);
    EXPECT_LE(gm_cost(linear_map(q), mu, Cost::quadratic(), Cost::quadratic()), 1e-12);
  }
}

TEST(GmCost, ScalingPairIsAVStatistic) {
  // Two points at distance 1, T = 2x.  Off-diagonal terms are (log 5 - log 2)^2,
  // each with weight 1/4; the diagonal contributes zero.
  const auto mu = EmpiricalMeasure::uniform(nd::Tensor::from_rows({{0.0, 0.0}, {1.0, 0.0}}));
  const auto two = nd::Tensor::from_rows({{2.0, 0.0}, {0.0, 2.0}});
  const double l = std::log(2.5);
  EXPECT_NEAR(gm_cost(linear_map(two), mu, Cost::log_quadratic(), Cost::log_quadratic()), 0.5 * l * l, 1e-15);
}

TEST(GmCost, MinibatchUStatisticOnScalingPair) {
  nd::Mlp twice{nd::MlpSpec::uniform({2, 2}, nd::Activation::identity), {2.0, 0.0, 0.0, 2.0, 0.0, 0.0}};
  const auto x = nd::Tensor::from_rows({{0.0, 0.0}, {1.0, 0.0}});
  const double l = std::log(2.5);
  EXPECT_NEAR(gme_minibatch_value(twice, x, Cost::log_quadratic(), Cost::log_quadratic()), l * l, 1e-12);

  nd::Tape tape;
  auto p = tape.variable(nd::Tensor::row_vector(twice.params));
  auto t = nd::mlp_forward(twice.spec, p, tape.constant(x));
  EXPECT_NEAR(gme_minibatch(x, t, Cost::log_quadratic(), Cost::log_quadratic()).value().item(), l * l, 1e-12);
}

TEST(GmCost, MinibatchRelationsAndErrors) {
  Rng rng(4);
  const auto spec = nd::MlpSpec::uniform({3, 6, 2}, nd::Activation::tanh);
  nd::Mlp net{spec, nd::init_params(spec, rng)};
  const auto x = random_tensor(9, 3, rng);
  // U-statistic = V-statistic * m / (m - 1) on a uniform batch.
  const double v = gm_cost(network_map(net), EmpiricalMeasure::uniform(x), Cost::log_quadratic(), Cost::log_quadratic());
  EXPECT_NEAR(gme_minibatch_value(net, x, Cost::log_quadratic(), Cost::log_quadratic()), v * 9.0 / 8.0, 1e-12);

  const auto same = nd::Tensor(5, 3, 0.7);
  EXPECT_EQ(gme_minibatch_value(net, same, Cost::log_quadratic(), Cost::log_quadratic()), 0.0);
  EXPECT_THROW(gme_minibatch_value(net, random_tensor(1, 3, rng), Cost::log_quadratic(), Cost::log_quadratic()),
               ContractError);
  EXPECT_THROW(gm_cost(identity_map(), EmpiricalMeasure::uniform(x), Cost::encoder_quadratic(identity_map()),
                       Cost::log_quadratic()),
               ContractError);
}

TEST(GmCost, MinibatchGradientMatchesFiniteDifferences) {
  Rng rng(31);
  for (const Cost& cy : {Cost::log_quadratic(), Cost::quadratic(2.0)}) {
    const auto spec = nd::MlpSpec::uniform({4, 8, 8, 2}, nd::Activation::tanh);
    nd::Mlp net{spec, nd::init_params(spec, rng)};
    const auto x = random_tensor(6, 4, rng);
    nd::Tape tape;
    auto p = tape.variable(nd::Tensor::row_vector(net.params));
    auto loss = gme_minibatch(x, nd::mlp_forward(spec, p, tape.constant(x)), Cost::log_quadratic(), cy);
    const auto grad = nd::backward_params(tape, loss, p);
    auto f = [&](std::span<const double> theta) {
      nd::Mlp probe{spec, {theta.begin(), theta.end()}};
      return gme_minibatch_value(probe, x, Cost::log_quadratic(), cy);
    };
    for (int probe = 0; probe < 100; ++probe) {
      const auto dir = gmelab::testing::random_vector(net.params.size(), rng);
      const double fd = gmelab::testing::central_difference(f, net.params, dir);
      EXPECT_LE(gmelab::testing::relative_error(gmelab::testing::directional(grad, dir), fd), 1e-4);
    }
  }
}

TEST(GwObjective, HandEvaluatedTwoByTwo) {
  Coupling c{nd::Tensor::from_rows({{0.3, 0.2}, {0.1, 0.4}}), {0.5, 0.5}, {0.4, 0.6}};
  const auto cx = nd::Tensor::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  const auto cy = nd::Tensor::from_rows({{0.0, 2.0}, {2.0, 0.0}});
  EXPECT_NEAR(gw_objective(c, cx, cy), 1.30, 1e-12);
}

TEST(GwObjective, IdentityCouplingAndGeneralPlans) {
  Rng rng(6);
  const auto x = random_tensor(5, 2, rng);
  const auto cx = pairwise_cost(Cost::log_quadratic(), x, x);
  EXPECT_EQ(gw_objective(Coupling::diagonal(std::vector<double>(5, 0.2)), cx, cx), 0.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto y = random_tensor(4, 3, rng);
    const auto cy = pairwise_cost(Cost::quadratic(), y, y);
    // Product coupling of two random marginals.
    std::vector<double> a(5), b(4);
    for (double& v : a) v = rng.uniform(0.1, 1.0);
    for (double& v : b) v = rng.uniform(0.1, 1.0);
    const double sa = std::accumulate(a.begin(), a.end(), 0.0), sb = std::accumulate(b.begin(), b.end(), 0.0);
    for (double& v : a) v /= sa;
    for (double& v : b) v /= sb;
    Coupling c{nd::Tensor(5, 4), a, b};
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 4; ++j) c.plan(i, j) = a[i] * b[j];
    EXPECT_NEAR(gw_objective(c, cx, cy), naive_gw(c.plan, cx, cy), 1e-12);
  }
  Coupling bad{nd::Tensor::from_rows({{0.5, 0.0}, {0.0, 0.4}}), {0.5, 0.5}, {0.5, 0.5}};
  EXPECT_THROW(gw_objective(bad, nd::Tensor(2, 2), nd::Tensor(2, 2)), ContractError);
}

TEST(GwObjective, MapInducedCouplingEqualsGmCost) {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_tensor(8, 3, rng);
    const auto m = random_tensor(3, 2, rng);
    const auto mu = EmpiricalMeasure::uniform(x);
    const auto tx = nd::matmul(x, m);
    const double gm = gm_cost(linear_map(m), mu, Cost::log_quadratic(), Cost::log_quadratic());
    const double gw = gw_objective(Coupling::diagonal(mu.weights()), pairwise_cost(Cost::log_quadratic(), x, x),
                                   pairwise_cost(Cost::log_quadratic(), tx, tx));
    EXPECT_EQ(gw, gm);
  }
}

TEST(Ccm, TwoPointExamples) {
  const Cost half_sq = Cost::quadratic(2.0);
  const auto pts = nd::Tensor::from_rows({{0.0}, {1.0}});
  const auto ok = ccm_check(pts, pts, half_sq, 2);
  EXPECT_TRUE(ok.is_ccm);
  EXPECT_EQ(ok.cycles_tested, 1u);
  EXPECT_DOUBLE_EQ(ok.worst_violation, -1.0);
  EXPECT_TRUE(ok.witness.empty());

  const auto flipped = nd::Tensor::from_rows({{1.0}, {0.0}});
  const auto bad = ccm_check(pts, flipped, half_sq, 2);
  EXPECT_FALSE(bad.is_ccm);
  EXPECT_DOUBLE_EQ(bad.worst_violation, 1.0);
  EXPECT_EQ(bad.witness, (std::vector<std::size_t>{1, 0}));
}

TEST(Ccm, OptimalAssignmentsAreCyclicallyMonotone) {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const auto x = random_tensor(n, 2, rng);
    const auto y = random_tensor(n, 2, rng);
    const Cost c = Cost::quadratic(trial % 2 ? 2.0 : 1.5);
    const auto sol = exact_ot_uniform(pairwise_cost(c, x, y));
    // Gamma = {(x_i, y_{a(i)})}.
    const auto report = ccm_check(x, y.gather_rows(*sol.assignment), c, std::min<std::size_t>(n, 6));
    EXPECT_TRUE(report.is_ccm) << "trial " << trial << " worst " << report.worst_violation;
  }
}

TEST(Ccm, FullLengthCyclesDetectSuboptimality) {
  Rng rng(78);
  int detected = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + trial % 4;
    const auto c = pairwise_cost(Cost::quadratic(), random_tensor(n, 2, rng), random_tensor(n, 2, rng));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
    const double gap = assignment_cost(c, perm) - brute_force_ot(c);
    if (gap > 0.0 && gap < 1e-6) continue;
    nd::Tensor gamma_cost(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) gamma_cost(i, j) = c(i, perm[j]);
    const auto report = ccm_check(gamma_cost, n);
    EXPECT_EQ(report.is_ccm, gap <= 0.0) << "trial " << trial;
    if (!report.is_ccm) {
      ++detected;
      // The witness permutation must realise the reported violation.
      double matched = 0.0, swapped = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        matched += gamma_cost(i, i);
        swapped += gamma_cost(report.witness[i], i);
      }
      EXPECT_NEAR(matched - swapped, report.worst_violation, 1e-12);
    }
  }
  EXPECT_GT(detected, 0);
}

TEST(Ccm, CycleLengthBounds) {
  EXPECT_THROW(ccm_check(nd::Tensor(3, 3), 7), ContractError);
  EXPECT_THROW(ccm_check(nd::Tensor(3, 3), 1), ContractError);
  EXPECT_THROW(ccm_check(nd::Tensor(3, 2), 2), DimensionError);
  const auto one = ccm_check(nd::Tensor(1, 1), 4);
  EXPECT_TRUE(one.is_ccm);
  EXPECT_EQ(one.cycles_tested, 0u);
  // C(5,2)*1 + C(5,3)*5 + C(5,4)*23
  EXPECT_EQ(ccm_check(nd::Tensor(5, 5), 4).cycles_tested, 10u + 50u + 115u);
}
