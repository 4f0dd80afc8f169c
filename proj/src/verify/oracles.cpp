#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "gmelab/errors.hpp"
#include "gmelab/verify.hpp"

namespace gmelab::verify {

using measures::EmpiricalMeasure;

namespace {

double row_distance(const nd::Tensor& a, std::size_t i, const nd::Tensor& b, std::size_t j) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    const double d = a(i, c) - b(j, c);
    s += d * d;
  }
  return std::sqrt(s);
}

nd::Tensor apply(const ot::PointMap& t, const nd::Tensor& points) {
  nd::Tensor image = t(points);
  if (image.rows() != points.rows()) throw DimensionError("map changed the number of points");
  image.require_finite("mapped points");
  return image;
}

void require_equal_uniform(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const char* who) {
  if (mu.empty() || mu.size() != nu.size() || !mu.is_uniform() || !nu.is_uniform()) {
    throw ContractError(std::string(who) + ": needs nonempty equal-size uniform measures");
  }
}

void require_injective(const nd::Tensor& image, const char* who) {
  for (std::size_t i = 0; i < image.rows(); ++i) {
    for (std::size_t j = i + 1; j < image.rows(); ++j) {
      if (row_distance(image, i, image, j) < kMinPairDistance) {
        throw ContractError(std::string(who) + ": map is not injective on the support (points " + std::to_string(i) +
                            ", " + std::to_string(j) + ")");
      }
    }
  }
}

bool close(double a, double b) { return std::abs(a - b) <= kOracleTolerance * (1.0 + std::abs(a) + std::abs(b)); }

}  // namespace

Quantiles quantiles(std::vector<double> values) {
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan, nan};
  }
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

std::vector<IndexPair> sample_pairs(std::size_t n, std::size_t num_pairs, Rng& rng) {
  if (n < 2) throw ContractError("sample_pairs: need at least two points");
  std::vector<IndexPair> pairs;
  pairs.reserve(num_pairs);
  for (std::size_t p = 0; p < num_pairs; ++p) {
    const std::size_t i = rng.index(n);
    std::size_t j = rng.index(n - 1);
    if (j >= i) ++j;
    pairs.emplace_back(i, j);
  }
  return pairs;
}

BiLipReport bilip_scatter(const ot::PointMap& t, const EmpiricalMeasure& sample, std::size_t num_pairs, Rng& rng) {
  if (num_pairs == 0) throw ContractError("bilip_scatter: num_pairs must be >= 1");
  if (sample.size() < 2) throw ContractError("bilip_scatter: degenerate sample");
  const auto pairs = sample_pairs(sample.size(), num_pairs, rng);
  return bilip_scatter(t, sample, pairs);
}

BiLipReport bilip_scatter(const ot::PointMap& t, const EmpiricalMeasure& sample, std::span<const IndexPair> pairs) {
  if (pairs.empty()) throw ContractError("bilip_scatter: num_pairs must be >= 1");
  const nd::Tensor& x = sample.points();
  bool degenerate = true;
  for (std::size_t i = 1; i < sample.size() && degenerate; ++i) {
    degenerate = row_distance(x, 0, x, i) < kMinPairDistance;
  }
  if (degenerate) throw ContractError("bilip_scatter: degenerate sample (all points equal)");

  const nd::Tensor tx = apply(t, x);
  BiLipReport report;
  std::vector<double> ratios;
  for (auto [i, j] : pairs) {
    if (i >= sample.size() || j >= sample.size()) throw ContractError("bilip_scatter: pair index out of range");
    const double d = row_distance(x, i, x, j);
    if (d < kMinPairDistance) {
      ++report.excluded;
      continue;
    }
    const double r = row_distance(tx, i, tx, j) / d;
    report.pairs.push_back({d, r});
    ratios.push_back(r);
  }
  report.ratio = quantiles(std::move(ratios));
  return report;
}

KSetReport kset_check(const ot::PointMap& t, const EmpiricalMeasure& mu, double alpha, double gamma) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("kset_check: alpha must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ContractError("kset_check: gamma must lie in (0, 1)");

  KSetReport r;
  r.alpha = alpha;
  r.gamma = gamma;
  r.separation = (1.0 - alpha) / (alpha * gamma);
  if (mu.empty()) {
    r.mass_in_k = 1.0;
    r.bound = 1.0;
    r.measure_bound_holds = r.pass = true;
    return r;
  }

  const nd::Tensor& x = mu.points();
  const nd::Tensor tx = apply(t, x);
  const nd::Tensor dx = nd::pairwise_sqdist(x, x);
  const nd::Tensor dt = nd::pairwise_sqdist(tx, tx);
  const auto w = mu.weights();
  const std::size_t n = mu.size();

  const ot::Cost log_cost = ot::Cost::log_quadratic();
  nd::Tensor cx = dx, cy = dt;
  for (double& v : cx.values()) v = log_cost.from_sqdist(v);
  for (double& v : cy.values()) v = log_cost.from_sqdist(v);
  r.epsilon = ot::gm_cost(cx, cy, w);
  const double la = std::log(alpha);
  r.bound = 1.0 - r.epsilon / (la * la);

  const double lo_factor = alpha * (1.0 - gamma);
  const double hi_factor = 1.0 / alpha + gamma;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double mass = w[i] * w[j];
      const double ratio = (dt(i, j) + 1.0) / (dx(i, j) + 1.0);
      if (ratio > 1.0 / alpha) {
        r.mass_in_b += mass;
        ++r.count_b;
      } else if (ratio < alpha) {
        r.mass_in_q += mass;
        ++r.count_q;
      } else {
        r.mass_in_k += mass;
        ++r.count_k;
        if (dx(i, j) >= r.separation) {
          ++r.separated_pairs;
          const double slack = kOracleTolerance * (1.0 + dx(i, j));
          if (dt(i, j) < lo_factor * dx(i, j) - slack || dt(i, j) > hi_factor * dx(i, j) + slack) {
            ++r.bilip_violations;
          }
        }
      }
    }
  }
  r.measure_bound_holds = r.mass_in_k >= r.bound - kOracleTolerance;
  r.pass = r.measure_bound_holds && r.bilip_violations == 0;
  return r;
}

double bilipschitz_constant(const ot::PointMap& t, const nd::Tensor& points) {
  const nd::Tensor image = apply(t, points);
  double alpha = 1.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t j = i + 1; j < points.rows(); ++j) {
      const double d = row_distance(points, i, points, j);
      if (d < kMinPairDistance) continue;
      const double ratio = row_distance(image, i, image, j) / d;
      alpha = std::min({alpha, ratio, 1.0 / ratio});
    }
  }
  return alpha;
}

SandwichReport prop21_sandwich(const ot::PointMap& t, const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                               double p) {
  require_equal_uniform(a, b, "prop21_sandwich");
  if (!(p >= 1.0)) throw ContractError("prop21_sandwich: p must be >= 1");
  if (a.dim() != b.dim()) throw DimensionError("prop21_sandwich: measures live in different dimensions");

  nd::Tensor both(a.size() + b.size(), a.dim());
  std::copy(a.points().values().begin(), a.points().values().end(), both.values().begin());
  std::copy(b.points().values().begin(), b.points().values().end(), both.values().begin() + a.points().size());

  SandwichReport r;
  r.p = p;
  r.alpha = bilipschitz_constant(t, both);
  r.w_source = ot::wasserstein_p(a, b, p);
  r.w_image = ot::wasserstein_p(EmpiricalMeasure::uniform(apply(t, a.points())),
                                EmpiricalMeasure::uniform(apply(t, b.points())), p);
  r.lower_slack = r.w_source - r.alpha * r.w_image;
  r.upper_slack = r.w_image / r.alpha - r.w_source;
  const double tol = kOracleTolerance * (1.0 + r.w_source + r.w_image / r.alpha);
  r.pass = r.lower_slack >= -tol && r.upper_slack >= -tol;
  return r;
}

EqualityReport lemma41_equality(const ot::PointMap& t, const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  require_equal_uniform(mu, nu, "lemma41_equality");
  const nd::Tensor image = apply(t, mu.points());
  if (image.cols() != nu.dim()) throw DimensionError("lemma41_equality: T maps outside the space of nu");
  require_injective(image, "lemma41_equality");

  EqualityReport r;
  r.ot_ct = ot::exact_ot_uniform(ot::pairwise_cost(ot::Cost::encoder_quadratic(t), mu.points(), nu.points())).cost;
  const double w2 = ot::wasserstein_p(EmpiricalMeasure::uniform(image), nu, 2.0);
  r.w2_half_sq = 0.5 * w2 * w2;
  r.delta = std::abs(r.ot_ct - r.w2_half_sq);
  r.pass = close(r.ot_ct, r.w2_half_sq);
  return r;
}

PushforwardReport thm42_pushforward(const nd::Tensor& t_matrix, const EmpiricalMeasure& mu,
                                    const EmpiricalMeasure& nu) {
  require_equal_uniform(mu, nu, "thm42_pushforward");
  const std::size_t dim = t_matrix.rows();
  if (t_matrix.cols() != dim || mu.dim() != dim || nu.dim() != dim) {
    throw DimensionError("thm42_pushforward: T must be a square matrix acting on the space of mu and nu");
  }
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Mat m = Eigen::Map<const Mat>(t_matrix.data(), dim, dim);
  // Rows transform as g M = z, so G* solves M^T g^T = z^T.
  const Eigen::FullPivLU<Mat> lu(m.transpose());
  if (!lu.isInvertible()) throw ContractError("thm42_pushforward: T is not invertible");

  const ot::PointMap t = ot::linear_map(t_matrix);
  const nd::Tensor image = apply(t, mu.points());
  require_injective(image, "thm42_pushforward");
  const std::size_t n = mu.size();

  PushforwardReport r;
  // R*: y_j -> (T#mu) point, the optimal quadratic assignment read from nu's side.
  const auto plan = ot::exact_ot_uniform(nd::pairwise_sqdist(nu.points(), image));
  r.r_star = *plan.assignment;

  r.g_star = nd::Tensor(n, dim);
  for (std::size_t j = 0; j < n; ++j) {
    const Eigen::Map<const Eigen::VectorXd> z(image.row(r.r_star[j]).data(), static_cast<Eigen::Index>(dim));
    const Eigen::VectorXd g = lu.solve(z);
    for (std::size_t c = 0; c < dim; ++c) r.g_star(j, c) = g(static_cast<Eigen::Index>(c));
  }

  // G*#nu against mu as multisets: best matching by distance, worst matched pair.
  const nd::Tensor gap = nd::pairwise_sqdist(r.g_star, mu.points());
  const auto match = ot::exact_ot_uniform(gap);
  for (std::size_t j = 0; j < n; ++j) {
    r.multiset_error = std::max(r.multiset_error, std::sqrt(gap(j, (*match.assignment)[j])));
  }

  const nd::Tensor tg = t(r.g_star);
  for (std::size_t j = 0; j < n; ++j) {
    const double d = row_distance(tg, j, nu.points(), j);
    r.cost_g_star += 0.5 * d * d;
  }
  r.cost_g_star /= static_cast<double>(n);
  r.ot_ct = ot::exact_ot_uniform(ot::pairwise_cost(ot::Cost::encoder_quadratic(t), mu.points(), nu.points())).cost;
  r.cost_gap = std::abs(r.cost_g_star - r.ot_ct);
  r.pass = r.multiset_error <= kOracleTolerance * (1.0 + mu.points().size()) && close(r.cost_g_star, r.ot_ct);
  return r;
}

double sawtooth(std::size_t k, double x) {
  if (k == 0) return x;
  const double kd = static_cast<double>(k);
  const double i = std::min(std::floor(kd * x), kd - 1.0);
  return 2.0 * kd * std::abs(x - (2.0 * i + 1.0) / (2.0 * kd));
}

double ks_uniform(std::vector<double> sample) {
  if (sample.empty()) throw ContractError("ks_uniform: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double ks = 0.0;
  for (std::size_t j = 0; j < sample.size(); ++j) {
    const double u = std::clamp(sample[j], 0.0, 1.0);
    ks = std::max({ks, static_cast<double>(j + 1) / n - u, u - static_cast<double>(j) / n});
  }
  return ks;
}

double gk_pushforward_demo(std::size_t k, std::size_t n) {
  if (n < 100) throw ContractError("gk_pushforward_demo: n must be >= 100");
  std::vector<double> pushed(n);
  for (std::size_t j = 0; j < n; ++j) pushed[j] = sawtooth(k, (static_cast<double>(j) + 0.5) / static_cast<double>(n));
  return ks_uniform(std::move(pushed));
}

}  // namespace gmelab::verify
