#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "gmelab/errors.hpp"
#include "gmelab/verify.hpp"
#include "gmelab/verify_io.hpp"
#include "test_support.hpp"

using namespace gmelab;
using namespace gmelab::verify;
using gmelab::measures::EmpiricalMeasure;
using gmelab::testing::brute_force_ot;
using gmelab::testing::random_rotation;
using gmelab::testing::random_tensor;

namespace {

nd::Tensor scaled(nd::Tensor m, double s) {
  for (double& v : m.values()) v *= s;
  return m;
}

nd::Tensor diag(std::initializer_list<double> d) {
  nd::Tensor m(d.size(), d.size());
  std::size_t k = 0;
  for (double v : d) m(k, k) = v, ++k;
  return m;
}

// Rotation times a diagonal with entries in [0.5, 2]: always invertible.
nd::Tensor random_invertible(std::size_t dim, Rng& rng) {
  nd::Tensor q = random_rotation(dim, rng);
  for (std::size_t c = 0; c < dim; ++c) {
    const double s = rng.uniform(0.5, 2.0);
    for (std::size_t r = 0; r < dim; ++r) q(r, c) *= s;
  }
  return q;
}

nd::Tensor column(std::initializer_list<double> v) {
  nd::Tensor t(v.size(), 1);
  std::copy(v.begin(), v.end(), t.values().begin());
  return t;
}

double sqdist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

// Linear bundle with T(G(y)) = sign * y: G embeds into the first two coordinates.
gan::NetworkBundle linear_bundle(std::size_t dim, double sign) {
  gan::NetworkBundle b;
  b.g.spec = nd::MlpSpec::uniform({2, dim}, nd::Activation::identity);
  b.t.spec = nd::MlpSpec::uniform({dim, 2}, nd::Activation::identity);
  b.psi.spec = nd::MlpSpec::uniform({dim, 1}, nd::Activation::identity);
  b.r_inv.spec = nd::MlpSpec::uniform({2, 2}, nd::Activation::identity);
  for (nd::Mlp* m : {&b.g, &b.t, &b.psi, &b.r_inv}) m->params.assign(m->spec.parameter_count(), 0.0);
  for (std::size_t k = 0; k < 2; ++k) {
    b.g.params[k * dim + k] = 1.0;
    b.t.params[k * 2 + k] = sign;
    b.r_inv.params[k * 2 + k] = 1.0;
  }
  return b;
}

}  // namespace

TEST(Quantiles, LinearInterpolation) {
  const auto q = quantiles({4.0, 1.0, 3.0, 2.0, 5.0});
  EXPECT_EQ(q.min, 1.0);
  EXPECT_EQ(q.q25, 2.0);
  EXPECT_EQ(q.median, 3.0);
  EXPECT_EQ(q.q75, 4.0);
  EXPECT_EQ(q.max, 5.0);
  EXPECT_DOUBLE_EQ(quantiles({0.0, 1.0}).median, 0.5);
  EXPECT_TRUE(std::isnan(quantiles({}).median));
}

TEST(BiLip, ScalingMapsGiveConstantRatios) {
  Rng rng(1);
  const auto mu = EmpiricalMeasure::uniform(random_tensor(30, 4, rng));
  const auto id = bilip_scatter(ot::identity_map(), mu, 200, rng);
  ASSERT_EQ(id.pairs.size(), 200u);
  for (const auto& p : id.pairs) {
    EXPECT_EQ(p.ratio, 1.0);
    EXPECT_GT(p.distance, 0.0);
  }
  const auto two = bilip_scatter(ot::linear_map(scaled(diag({1, 1, 1, 1}), 2.0)), mu, 200, rng);
  for (const auto& p : two.pairs) EXPECT_NEAR(p.ratio, 2.0, 1e-14);
  EXPECT_NEAR(two.ratio.median, 2.0, 1e-14);
  EXPECT_NEAR(two.ratio.iqr(), 0.0, 1e-14);
}

TEST(BiLip, SamePairsForTwoMaps) {
  Rng rng(2);
  const auto mu = EmpiricalMeasure::uniform(random_tensor(20, 3, rng));
  const auto pairs = sample_pairs(mu.size(), 50, rng);
  for (auto [i, j] : pairs) EXPECT_NE(i, j);
  const auto a = bilip_scatter(ot::identity_map(), mu, pairs);
  const auto b = bilip_scatter(ot::linear_map(scaled(diag({1, 1, 1}), 3.0)), mu, pairs);
  ASSERT_EQ(a.pairs.size(), b.pairs.size());
  for (std::size_t k = 0; k < a.pairs.size(); ++k) EXPECT_EQ(a.pairs[k].distance, b.pairs[k].distance);
}

TEST(BiLip, DuplicatesExcludedAndDegenerateRejected) {
  Rng rng(3);
  nd::Tensor x(2, 2, 1.0);
  EXPECT_THROW(bilip_scatter(ot::identity_map(), EmpiricalMeasure::uniform(x), 10, rng), ContractError);
  EXPECT_THROW(bilip_scatter(ot::identity_map(), EmpiricalMeasure::uniform(random_tensor(4, 2, rng)), 0, rng),
               ContractError);

  nd::Tensor y = nd::Tensor::from_rows({{0, 0}, {0, 0}, {1, 0}});
  const std::vector<IndexPair> pairs{{0, 1}, {0, 2}, {1, 2}};
  const auto r = bilip_scatter(ot::identity_map(), EmpiricalMeasure::uniform(y), pairs);
  EXPECT_EQ(r.excluded, 1u);
  EXPECT_EQ(r.pairs.size(), 2u);
}

TEST(KSet, IsometryKeepsEverythingInK) {
  Rng rng(4);
  const auto mu = EmpiricalMeasure::uniform(random_tensor(15, 3, rng));
  const auto r = kset_check(ot::linear_map(random_rotation(3, rng)), mu, 0.8, 0.5);
  EXPECT_LE(r.epsilon, 1e-12);
  EXPECT_EQ(r.count_k, 225u);
  EXPECT_NEAR(r.mass_in_k, 1.0, 1e-12);
  EXPECT_NEAR(r.bound, 1.0, 1e-9);
  EXPECT_TRUE(r.pass);
}

TEST(KSet, ScaledTwoPointInstance) {
  // mu = {0, 1}, T = 3x: off-diagonal ratio (9 + 1) / (1 + 1) = 5 > 1/0.8.
  const auto mu = EmpiricalMeasure::uniform(column({0.0, 1.0}));
  const auto r = kset_check(ot::linear_map(column({3.0})), mu, 0.8, 0.5);
  const double l5 = std::log(5.0);
  EXPECT_NEAR(r.epsilon, 0.5 * l5 * l5, 1e-14);
  EXPECT_EQ(r.count_k, 2u);
  EXPECT_EQ(r.count_b, 2u);
  EXPECT_EQ(r.count_q, 0u);
  EXPECT_DOUBLE_EQ(r.mass_in_k, 0.5);
  EXPECT_DOUBLE_EQ(r.bound, 1.0 - r.epsilon / (std::log(0.8) * std::log(0.8)));
  EXPECT_TRUE(r.pass);
}

TEST(KSet, RandomLinearInstancesAllPass) {
  Rng rng(5);
  std::size_t informative = 0, separated = 0;
  for (int trial = 0; trial < 50; ++trial) {
    // Alternate near-isometries of the plane (bound close to 1) and generic maps R^3 -> R^2.
    const bool near = trial % 2 == 0;
    nd::Tensor m = near ? random_rotation(2, rng) : random_tensor(3, 2, rng, 0.8);
    if (near) {
      for (double& v : m.values()) v += 0.05 * rng.normal();
    }
    const nd::Tensor x = random_tensor(20, m.rows(), rng, 1.5);
    const auto mu = EmpiricalMeasure::uniform(x);
    const auto r = kset_check(ot::linear_map(m), mu, 0.8, 0.5);
    ASSERT_TRUE(r.pass) << "trial " << trial;
    EXPECT_NEAR(r.mass_in_k + r.mass_in_b + r.mass_in_q, 1.0, 1e-12);
    EXPECT_EQ(r.count_k + r.count_b + r.count_q, 400u);

    // Independent classification of the 400 ordered pairs.
    const nd::Tensor tx = nd::matmul(x, m);
    std::size_t k = 0, b = 0, q = 0;
    for (std::size_t i = 0; i < 20; ++i) {
      for (std::size_t j = 0; j < 20; ++j) {
        const double ratio = (sqdist(tx.row(i), tx.row(j)) + 1.0) / (sqdist(x.row(i), x.row(j)) + 1.0);
        if (ratio > 1.25) ++b;
        else if (ratio < 0.8) ++q;
        else ++k;
      }
    }
    EXPECT_EQ(r.count_k, k);
    EXPECT_EQ(r.count_b, b);
    EXPECT_EQ(r.count_q, q);
    informative += r.bound > 0.5 ? 1 : 0;
    separated += r.separated_pairs;
  }
  EXPECT_GE(informative, 20u);
  EXPECT_GT(separated, 0u);
}

TEST(KSet, RejectsBadParameters) {
  const auto mu = EmpiricalMeasure::uniform(column({0.0, 1.0}));
  EXPECT_THROW(kset_check(ot::identity_map(), mu, 1.0, 0.5), ContractError);
  EXPECT_THROW(kset_check(ot::identity_map(), mu, 0.5, 0.0), ContractError);
}

TEST(Sandwich, IdentityIsTight) {
  Rng rng(6);
  const auto a = EmpiricalMeasure::uniform(random_tensor(6, 2, rng));
  const auto b = EmpiricalMeasure::uniform(random_tensor(6, 2, rng));
  const auto r = prop21_sandwich(ot::identity_map(), a, b, 2.0);
  EXPECT_EQ(r.alpha, 1.0);
  EXPECT_NEAR(r.lower_slack, 0.0, 1e-12);
  EXPECT_NEAR(r.upper_slack, 0.0, 1e-12);
  EXPECT_TRUE(r.pass);
  // Independent W_2 by enumeration.
  EXPECT_NEAR(r.w_source * r.w_source / 2.0, brute_force_ot(scaled(nd::pairwise_sqdist(a.points(), b.points()), 0.5)),
              1e-12);
}

TEST(Sandwich, ScaledRotationIsTightBelow) {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = EmpiricalMeasure::uniform(random_tensor(7, 2, rng));
    const auto b = EmpiricalMeasure::uniform(random_tensor(7, 2, rng));
    const double p = 1.0 + trial % 3;
    const auto r = prop21_sandwich(ot::linear_map(scaled(random_rotation(2, rng), 3.0)), a, b, p);
    EXPECT_NEAR(r.alpha, 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(r.w_image, 3.0 * r.w_source, 1e-12);
    EXPECT_NEAR(r.lower_slack, 0.0, 1e-12);
    EXPECT_TRUE(r.pass);
  }
}

TEST(Sandwich, DiagonalStretchHoldsStrictly) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = EmpiricalMeasure::uniform(random_tensor(8, 2, rng));
    const auto b = EmpiricalMeasure::uniform(random_tensor(8, 2, rng));
    const auto r = prop21_sandwich(ot::linear_map(diag({1.0, 2.0})), a, b, 1.0 + trial % 3);
    EXPECT_GE(r.alpha, 0.5 - 1e-15);
    EXPECT_TRUE(r.pass) << "trial " << trial;
    EXPECT_GT(r.lower_slack, 0.0);
    EXPECT_GT(r.upper_slack, 0.0);
  }
}

TEST(BiLipConstant, BruteForceOverPairs) {
  Rng rng(9);
  const auto x = random_tensor(10, 3, rng);
  EXPECT_NEAR(bilipschitz_constant(ot::linear_map(scaled(random_rotation(3, rng), 0.25)), x), 0.25, 1e-12);
  EXPECT_EQ(bilipschitz_constant(ot::identity_map(), x), 1.0);
}

TEST(Lemma41, OneDimensionalInstance) {
  const auto mu = EmpiricalMeasure::uniform(column({0.0, 1.0}));
  const auto nu = EmpiricalMeasure::uniform(column({0.5, 2.5}));
  const auto r = lemma41_equality(ot::linear_map(column({2.0})), mu, nu);
  EXPECT_NEAR(r.ot_ct, 0.125, 1e-15);
  EXPECT_NEAR(r.w2_half_sq, 0.125, 1e-15);
  EXPECT_TRUE(r.pass);
}

TEST(Lemma41, IdentityGivesQuadraticOt) {
  Rng rng(10);
  const auto x = random_tensor(6, 2, rng);
  const auto y = random_tensor(6, 2, rng);
  const auto r = lemma41_equality(ot::identity_map(), EmpiricalMeasure::uniform(x), EmpiricalMeasure::uniform(y));
  EXPECT_NEAR(r.ot_ct, brute_force_ot(scaled(nd::pairwise_sqdist(x, y), 0.5)), 1e-12);
  EXPECT_TRUE(r.pass);
}

TEST(Lemma41, RandomInvertibleMaps) {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.index(15);
    const std::size_t dim = 1 + rng.index(3);
    const auto mu = EmpiricalMeasure::uniform(random_tensor(n, dim, rng));
    const auto nu = EmpiricalMeasure::uniform(random_tensor(n, dim, rng));
    const nd::Tensor m = random_invertible(dim, rng);
    const auto r = lemma41_equality(ot::linear_map(m), mu, nu);
    EXPECT_LE(r.delta, 1e-9) << "trial " << trial;
    EXPECT_TRUE(r.pass);
    if (n <= 7) {
      // Both sides by enumeration.
      const nd::Tensor tx = nd::matmul(mu.points(), m);
      EXPECT_NEAR(r.ot_ct, brute_force_ot(scaled(nd::pairwise_sqdist(tx, nu.points()), 0.5)), 1e-12);
    }
  }
}

TEST(Lemma41, RejectsNonInjectiveMaps) {
  const auto mu = EmpiricalMeasure::uniform(nd::Tensor::from_rows({{0, 0}, {0, 1}}));
  const auto nu = EmpiricalMeasure::uniform(nd::Tensor::from_rows({{0, 0}, {1, 1}}));
  EXPECT_THROW(lemma41_equality(ot::linear_map(diag({1.0, 0.0})), mu, nu), ContractError);
  EXPECT_THROW(lemma41_equality(ot::identity_map(), mu, EmpiricalMeasure::uniform(column({1.0}))), ContractError);
}

TEST(Thm42, OneDimensionalInstance) {
  const auto mu = EmpiricalMeasure::uniform(column({0.0, 1.0}));
  const auto nu = EmpiricalMeasure::uniform(column({0.5, 2.5}));
  const auto r = thm42_pushforward(column({2.0}), mu, nu);
  EXPECT_DOUBLE_EQ(r.g_star(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(r.g_star(1, 0), 1.0);
  EXPECT_NEAR(r.cost_g_star, 0.125, 1e-15);
  EXPECT_TRUE(r.pass);
}

TEST(Thm42, IdentityGivesTheQuadraticMap) {
  Rng rng(12);
  const auto x = random_tensor(6, 2, rng);
  const auto y = random_tensor(6, 2, rng);
  const auto r = thm42_pushforward(diag({1.0, 1.0}), EmpiricalMeasure::uniform(x), EmpiricalMeasure::uniform(y));
  // mean |G*(y_j) - y_j|^2 / 2 is the optimal quadratic cost.
  double cost = 0.0;
  for (std::size_t j = 0; j < 6; ++j) cost += 0.5 * sqdist(r.g_star.row(j), y.row(j)) / 6.0;
  EXPECT_NEAR(cost, brute_force_ot(scaled(nd::pairwise_sqdist(x, y), 0.5)), 1e-12);
  EXPECT_TRUE(r.pass);
}

TEST(Thm42, RandomInstancesRecoverMu) {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.index(15);
    const std::size_t dim = 1 + rng.index(3);
    const auto mu = EmpiricalMeasure::uniform(random_tensor(n, dim, rng));
    const auto nu = EmpiricalMeasure::uniform(random_tensor(n, dim, rng));
    const auto r = thm42_pushforward(random_invertible(dim, rng), mu, nu);
    EXPECT_TRUE(r.pass) << "trial " << trial;
    EXPECT_LE(r.multiset_error, 1e-9);
    EXPECT_LE(r.cost_gap, 1e-9);
    // R* is a permutation.
    EXPECT_EQ(std::set<std::size_t>(r.r_star.begin(), r.r_star.end()).size(), n);
  }
}

TEST(Thm42, SingularMapRejected) {
  const auto mu = EmpiricalMeasure::uniform(nd::Tensor::from_rows({{0, 0}, {1, 1}}));
  EXPECT_THROW(thm42_pushforward(diag({1.0, 0.0}), mu, mu), ContractError);
  EXPECT_THROW(thm42_pushforward(nd::Tensor(2, 3), mu, mu), DimensionError);
}

TEST(CcmTrained, ExactInverseBundlePassesEveryCycle) {
  Rng rng(14);
  const auto r = ccm_trained(linear_bundle(5, 1.0), 40, 3, rng);
  EXPECT_EQ(r.cycles_tested, 1000u);
  EXPECT_EQ(r.cycles_passed, 1000u);
  EXPECT_TRUE(r.is_ccm);
  EXPECT_TRUE(r.witness.empty());
}

TEST(CcmTrained, NegatedBundleFailsEveryTwoCycle) {
  // c(x_i, y_j) = |y_i + y_j|^2 / 2, so a swap gains |y_i - y_j|^2.
  Rng rng(15);
  const auto r = ccm_trained(linear_bundle(4, -1.0), 30, 2, rng, 200);
  EXPECT_EQ(r.cycles_passed, 0u);
  EXPECT_FALSE(r.is_ccm);
  ASSERT_EQ(r.witness.size(), 30u);
  std::size_t moved = 0;
  for (std::size_t i = 0; i < 30; ++i) moved += r.witness[i] != i ? 1 : 0;
  EXPECT_EQ(moved, 2u);
  EXPECT_EQ(std::set<std::size_t>(r.witness.begin(), r.witness.end()).size(), 30u);
}

TEST(CcmTrained, UntrainedBundleIsReported) {
  gan::TrainConfig c;
  for (auto* a : {&c.g_arch, &c.t_arch, &c.psi_arch, &c.r_inv_arch}) a->hidden = {8};
  Rng rng(16);
  const auto b = gan::init_bundle(c, 6, rng);
  const auto r = ccm_trained(b, 25, 3, rng);
  EXPECT_EQ(r.cycles_tested, 1000u);
  EXPECT_LE(r.cycles_passed, r.cycles_tested);
  EXPECT_TRUE(std::isfinite(r.worst_violation));
  EXPECT_THROW(ccm_trained(b, 25, 6, rng), ContractError);
  EXPECT_THROW(ccm_trained(b, 2, 3, rng), ContractError);
}

TEST(Monotone2d, IdentityAndNegation) {
  Rng rng(17);
  EXPECT_EQ(monotone2d_check(linear_bundle(3, 1.0), 50, rng), 1.0);
  EXPECT_EQ(monotone2d_check(linear_bundle(3, -1.0), 50, rng), 0.0);
  gan::TrainConfig c;
  c.latent_dim = 3;
  for (auto* a : {&c.g_arch, &c.t_arch, &c.psi_arch, &c.r_inv_arch}) a->hidden = {4};
  const auto b = gan::init_bundle(c, 5, rng);
  EXPECT_THROW(monotone2d_check(b, 10, rng), ContractError);
}

TEST(Sawtooth, TeethValues) {
  EXPECT_EQ(sawtooth(0, 0.3), 0.3);
  EXPECT_DOUBLE_EQ(sawtooth(2, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(sawtooth(2, 0.25), 0.0);
  EXPECT_DOUBLE_EQ(sawtooth(2, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(sawtooth(2, 0.75), 0.0);
  EXPECT_DOUBLE_EQ(sawtooth(2, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(sawtooth(1, 0.125), 0.75);
}

TEST(Sawtooth, KsMatchesGridResolution) {
  const std::size_t n = 10000;
  EXPECT_NEAR(gk_pushforward_demo(0, n), 0.5 / n, 1e-15);
  // Each value of the pushed grid is hit 2k times, spaced 2k/n apart: KS = k/n.
  for (std::size_t k : {1u, 2u, 5u}) {
    const double ks = gk_pushforward_demo(k, n);
    EXPECT_NEAR(ks, static_cast<double>(k) / n, 1e-12) << k;
    EXPECT_LE(ks, 0.02);
  }
  EXPECT_THROW(gk_pushforward_demo(1, 99), ContractError);
}

TEST(Ks, SmallSamples) {
  EXPECT_DOUBLE_EQ(ks_uniform({0.5}), 0.5);
  EXPECT_DOUBLE_EQ(ks_uniform({0.25, 0.75}), 0.25);
  EXPECT_DOUBLE_EQ(ks_uniform({0.0, 0.0}), 1.0);
}

TEST(RelativeStd, HandValues) {
  const std::vector<std::size_t> flat{10, 10, 10}, ramp{5, 10, 15}, collapse{0, 0, 30};
  EXPECT_EQ(relative_std(flat), 0.0);
  EXPECT_DOUBLE_EQ(relative_std(ramp), 0.5);
  EXPECT_NEAR(relative_std(collapse), std::sqrt(300.0) / 10.0, 1e-15);
}

TEST(RelativeStd, PermutationAndScaleInvariant) {
  Rng rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> c(2 + rng.index(10));
    for (auto& v : c) v = 1 + rng.index(100);
    const double base = relative_std(c);
    std::vector<std::size_t> shuffled = c;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_NEAR(relative_std(shuffled), base, 1e-14);
    std::vector<std::size_t> times = c;
    for (auto& v : times) v *= 7;
    EXPECT_NEAR(relative_std(times), base, 1e-14);
  }
}

TEST(RelativeStd, LabelsExcludeUnassigned) {
  const std::vector<int> labels{0, 1, 2, -1, 1, 2, 2, -1};
  const auto r = relative_std(labels, 3);
  EXPECT_EQ(r.modes.unassigned, 2u);
  EXPECT_EQ(r.modes.counts, (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(r.value, 0.5);
  const std::vector<int> none{-1, -1};
  EXPECT_THROW(relative_std(none, 3), ContractError);
  const std::vector<int> bad{0, 3};
  EXPECT_THROW(relative_std(bad, 3), ContractError);
  const std::vector<std::size_t> one{4};
  EXPECT_THROW(relative_std(one), ContractError);
}

TEST(Modulus, ConstantCriticIsFlat) {
  Rng rng(19);
  nd::Mlp psi{nd::MlpSpec::uniform({3, 4, 1}, nd::Activation::relu), {}};
  psi.params.assign(psi.spec.parameter_count(), 0.0);
  psi.params.back() = 2.5;
  const auto p = modulus_probe(psi, EmpiricalMeasure::uniform(random_tensor(30, 3, rng)), 300, rng, 10);
  ASSERT_EQ(p.omega.size(), 10u);
  for (double v : p.omega) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(std::accumulate(p.bin_counts.begin(), p.bin_counts.end(), std::size_t{0}), 300u);
}

TEST(Modulus, LinearCriticBoundedByNorm) {
  Rng rng(20);
  const std::vector<double> w{3.0, -4.0};  // |w| = 5
  nd::Mlp psi{nd::MlpSpec::uniform({2, 1}, nd::Activation::identity), {w[0], w[1], 0.7}};
  const auto x = random_tensor(40, 2, rng);
  const auto p = modulus_probe(psi, EmpiricalMeasure::uniform(x), 500, rng, 8);
  for (std::size_t b = 0; b < 8; ++b) EXPECT_LE(p.raw_max[b], 5.0 * p.bin_edges[b + 1] * (1 + 1e-12));

  // Points along w: every jump is exactly |w| times the distance.
  nd::Tensor line(20, 2);
  for (std::size_t i = 0; i < 20; ++i) {
    line(i, 0) = 0.6 * static_cast<double>(i) / 7.0;
    line(i, 1) = -0.8 * static_cast<double>(i) / 7.0;
  }
  const auto pairs = sample_pairs(20, 300, rng);
  const auto q = modulus_probe(psi, EmpiricalMeasure::uniform(line), pairs, 5);
  EXPECT_NEAR(q.omega.back(), 5.0 * q.bin_edges.back(), 1e-12);
}

TEST(Modulus, OmegaIsMonotone) {
  Rng rng(21);
  gan::TrainConfig c;
  for (auto* a : {&c.g_arch, &c.t_arch, &c.psi_arch, &c.r_inv_arch}) a->hidden = {16, 16};
  const auto b = gan::init_bundle(c, 4, rng);
  const auto mu = EmpiricalMeasure::uniform(random_tensor(50, 4, rng));
  const auto pairs = sample_pairs(50, 400, rng);
  const auto p = modulus_probe(b.psi, mu, pairs, 12);
  for (std::size_t k = 1; k < p.omega.size(); ++k) EXPECT_GE(p.omega[k], p.omega[k - 1]);
  for (std::size_t k = 0; k < p.omega.size(); ++k) EXPECT_GE(p.omega[k], p.raw_max[k]);
  EXPECT_EQ(fraction_of_bins_below(p, p), 1.0);
  const auto other = modulus_probe(b.psi, mu, pairs, 6);
  EXPECT_THROW(fraction_of_bins_below(p, other), ContractError);
}

TEST(VerifyIo, JsonAndCsv) {
  const auto mu = EmpiricalMeasure::uniform(column({0.0, 1.0}));
  const auto k = to_json(kset_check(ot::linear_map(column({3.0})), mu, 0.8, 0.5));
  EXPECT_EQ(k.at("count_b"), 2);
  EXPECT_EQ(k.at("pass"), true);

  ot::CcmReport c;
  c.cycles_tested = 4;
  c.cycles_passed = 3;
  EXPECT_DOUBLE_EQ(to_json(c).at("pass_fraction").get<double>(), 0.75);

  Rng rng(22);
  const auto r = bilip_scatter(ot::identity_map(), mu, 3, rng);
  std::ostringstream out;
  write_bilip_csv(out, r);
  EXPECT_EQ(out.str(), "distance,ratio\n1,1\n1,1\n1,1\n");
}
