#include "gmelab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "gmelab/errors.hpp"

namespace gmelab::measures {

namespace {

constexpr double kSimplexTol = 1e-12;

void require_simplex(std::span<const double> w, const char* what) {
  // Neumaier summation: naive accumulation of 1e5 equal weights already
  // drifts past the tolerance.
  double total = 0.0, comp = 0.0;
  for (double v : w) {
    if (!std::isfinite(v) || v < 0.0) throw ContractError(std::string(what) + ": negative or non-finite weight");
    const double t = total + v;
    comp += std::abs(total) >= v ? (total - t) + v : (v - t) + total;
    total = t;
  }
  total += comp;
  if (std::abs(total - 1.0) > kSimplexTol) {
    throw ContractError(std::string(what) + ": weights sum to " + std::to_string(total) + ", not 1");
  }
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(nd::Tensor points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (weights_.size() != points_.rows()) {
    throw DimensionError("EmpiricalMeasure: " + std::to_string(weights_.size()) + " weights for " +
                         std::to_string(points_.rows()) + " points");
  }
  points_.require_finite("EmpiricalMeasure points");
  if (!weights_.empty()) require_simplex(weights_, "EmpiricalMeasure");
}

EmpiricalMeasure EmpiricalMeasure::uniform(nd::Tensor points) {
  const std::size_t n = points.rows();
  return EmpiricalMeasure(std::move(points), std::vector<double>(n, n ? 1.0 / static_cast<double>(n) : 0.0));
}

bool EmpiricalMeasure::is_uniform() const {
  return std::all_of(weights_.begin(), weights_.end(), [&](double w) { return w == weights_.front(); });
}

void GaussianMixtureSpec::validate() const {
  if (ambient_dim == 0 || num_modes == 0) throw ContractError("mixture: ambient_dim and num_modes must be positive");
  if (centers.rows() != num_modes || centers.cols() != ambient_dim) {
    throw DimensionError("mixture: centers must be num_modes x ambient_dim");
  }
  centers.require_finite("mixture centers");
  for (std::size_t k = 0; k < num_modes; ++k) {
    for (std::size_t j = 2; j < ambient_dim; ++j) {
      if (centers(k, j) != 0.0) throw ContractError("mixture: centers must vanish beyond the first two coordinates");
    }
  }
  if (!(var_leading > var_trailing && var_trailing > 0.0)) {
    throw ContractError("mixture: need var_leading > var_trailing > 0");
  }
  if (mode_weights.size() != num_modes) throw DimensionError("mixture: one weight per mode");
  require_simplex(mode_weights, "mixture mode_weights");
}

GaussianMixtureSpec GaussianMixtureSpec::from_planar_centers(std::size_t ambient_dim,
                                                             const std::vector<std::array<double, 2>>& planar,
                                                             double var_leading, double var_trailing) {
  GaussianMixtureSpec s;
  s.ambient_dim = ambient_dim;
  s.num_modes = planar.size();
  s.centers = nd::Tensor(planar.size(), ambient_dim);
  for (std::size_t k = 0; k < planar.size(); ++k) {
    for (std::size_t j = 0; j < std::min<std::size_t>(2, ambient_dim); ++j) s.centers(k, j) = planar[k][j];
  }
  s.var_leading = var_leading;
  s.var_trailing = var_trailing;
  s.mode_weights.assign(planar.size(), 1.0 / static_cast<double>(planar.size()));
  s.validate();
  return s;
}

GaussianMixtureSpec GaussianMixtureSpec::nine_modes(std::size_t ambient_dim) {
  std::vector<std::array<double, 2>> c;
  for (double a : {-3.0, 0.0, 3.0}) {
    for (double b : {-3.0, 0.0, 3.0}) c.push_back({a, b});
  }
  return from_planar_centers(ambient_dim, c);
}

GaussianMixtureSpec GaussianMixtureSpec::twelve_modes(std::size_t ambient_dim) {
  std::vector<std::array<double, 2>> c;
  for (double a : {-4.5, -1.5, 1.5, 4.5}) {
    for (double b : {-3.0, 0.0, 3.0}) c.push_back({a, b});
  }
  return from_planar_centers(ambient_dim, c);
}

LabeledSample sample_mixture(const GaussianMixtureSpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  if (n == 0) throw ContractError("sample_mixture: n must be at least 1");
  std::discrete_distribution<int> pick(spec.mode_weights.begin(), spec.mode_weights.end());
  const double sd_lead = std::sqrt(spec.var_leading);
  const double sd_trail = std::sqrt(spec.var_trailing);
  nd::Tensor pts(n, spec.ambient_dim);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int k = pick(rng);
    labels[i] = k;
    for (std::size_t j = 0; j < spec.ambient_dim; ++j) {
      pts(i, j) = spec.centers(k, j) + (j < 2 ? sd_lead : sd_trail) * rng.normal();
    }
  }
  return {EmpiricalMeasure::uniform(std::move(pts)), std::move(labels)};
}

EmpiricalMeasure sample_latent(std::size_t d, std::size_t n, Rng& rng) {
  if (d == 0) throw ContractError("sample_latent: d must be at least 1");
  nd::Tensor pts(n, d);
  for (double& v : pts.values()) v = rng.normal();
  return EmpiricalMeasure::uniform(std::move(pts));
}

std::vector<int> assign_mode(const nd::Tensor& points, const GaussianMixtureSpec& spec, double radius_multiplier) {
  spec.validate();
  if (points.cols() != spec.ambient_dim) {
    throw DimensionError("assign_mode: points have dim " + std::to_string(points.cols()) + ", mixture has " +
                         std::to_string(spec.ambient_dim));
  }
  const std::size_t lead = std::min<std::size_t>(2, spec.ambient_dim);
  const double radius = radius_multiplier * std::sqrt(spec.var_leading);
  std::vector<int> labels(points.rows(), kUnassigned);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = kUnassigned;
    for (std::size_t k = 0; k < spec.num_modes; ++k) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < lead; ++j) {
        const double diff = points(i, j) - spec.centers(k, j);
        d2 += diff * diff;
      }
      if (d2 < best) {
        best = d2;
        arg = static_cast<int>(k);
      }
    }
    if (std::sqrt(best) <= radius) labels[i] = arg;
  }
  return labels;
}

}  // namespace gmelab::measures
