#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gmelab/errors.hpp"
#include "gmelab/verify.hpp"

namespace gmelab::verify {

namespace {

nd::Tensor latent_draws(std::size_t d, std::size_t n, Rng& rng) {
  nd::Tensor y(n, d);
  for (double& v : y.values()) v = rng.normal();
  return y;
}

}  // namespace

ot::CcmReport ccm_trained(const gan::NetworkBundle& bundle, std::size_t n_probe, std::size_t cycle_len, Rng& rng,
                          std::size_t num_cycles, double tol) {
  bundle.validate();
  if (cycle_len < 2 || cycle_len > 5) throw ContractError("ccm_trained: cycle_len must be in [2, 5]");
  if (n_probe < cycle_len) throw ContractError("ccm_trained: n_probe must be >= cycle_len");

  const nd::Tensor y = latent_draws(bundle.latent_dim(), n_probe, rng);
  const nd::Tensor tx = nd::mlp_forward(bundle.t, nd::mlp_forward(bundle.g, y));
  // cost(i, j) = c_T(G(y_i), y_j) = |T(G(y_i)) - y_j|^2 / 2
  nd::Tensor cost = nd::pairwise_sqdist(tx, y);
  for (double& v : cost.values()) v *= 0.5;
  cost.require_finite("ccm_trained cost matrix");

  ot::CcmReport report;
  report.worst_violation = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> worst_cycle;
  std::vector<std::size_t> pool(n_probe);
  for (std::size_t c = 0; c < num_cycles; ++c) {
    const std::size_t len = 2 + rng.index(cycle_len - 1);
    // Partial Fisher-Yates: the first `len` entries are distinct uniform indices.
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t t = 0; t < len; ++t) std::swap(pool[t], pool[t + rng.index(n_probe - t)]);

    double matched = 0.0, shifted = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      matched += cost(pool[t], pool[t]);
      shifted += cost(pool[(t + 1) % len], pool[t]);
    }
    const double violation = matched - shifted;
    ++report.cycles_tested;
    if (violation <= tol) ++report.cycles_passed;
    if (violation > report.worst_violation) {
      report.worst_violation = violation;
      worst_cycle.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(len));
    }
  }
  if (report.cycles_tested == 0) report.worst_violation = 0.0;
  report.is_ccm = report.cycles_passed == report.cycles_tested;
  if (!report.is_ccm) {
    report.witness.resize(n_probe);
    std::iota(report.witness.begin(), report.witness.end(), 0);
    for (std::size_t t = 0; t < worst_cycle.size(); ++t) {
      report.witness[worst_cycle[t]] = worst_cycle[(t + 1) % worst_cycle.size()];
    }
  }
  return report;
}

double monotone2d_check(const gan::NetworkBundle& bundle, std::size_t n_probe, Rng& rng) {
  bundle.validate();
  if (bundle.latent_dim() != 2) throw ContractError("monotone2d_check: latent dimension must be 2");
  if (n_probe < 2) throw ContractError("monotone2d_check: n_probe must be >= 2");

  const nd::Tensor y = latent_draws(2, n_probe, rng);
  const nd::Tensor r = nd::mlp_forward(bundle.t, nd::mlp_forward(bundle.g, y));
  std::size_t good = 0, total = 0;
  for (std::size_t i = 0; i < n_probe; ++i) {
    for (std::size_t j = i + 1; j < n_probe; ++j) {
      const double inner = (r(i, 0) - r(j, 0)) * (y(i, 0) - y(j, 0)) + (r(i, 1) - r(j, 1)) * (y(i, 1) - y(j, 1));
      if (inner >= 0.0) ++good;
      ++total;
    }
  }
  return static_cast<double>(good) / static_cast<double>(total);
}

ModeCounts count_modes(std::span<const int> labels, std::size_t num_modes) {
  ModeCounts out;
  out.counts.assign(num_modes, 0);
  for (int l : labels) {
    if (l == measures::kUnassigned) {
      ++out.unassigned;
    } else if (l < 0 || static_cast<std::size_t>(l) >= num_modes) {
      throw ContractError("count_modes: label " + std::to_string(l) + " outside [0, " + std::to_string(num_modes) +
                          ")");
    } else {
      ++out.counts[static_cast<std::size_t>(l)];
    }
  }
  return out;
}

double relative_std(std::span<const std::size_t> counts) {
  if (counts.size() < 2) throw ContractError("relative_std: need at least two classes");
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0,
                                       [](double s, std::size_t c) { return s + static_cast<double>(c); });
  if (total == 0.0) throw ContractError("relative_std: every label is unassigned");
  const double k = static_cast<double>(counts.size());
  const double mean = total / k;
  double ss = 0.0;
  for (std::size_t c : counts) ss += (static_cast<double>(c) - mean) * (static_cast<double>(c) - mean);
  return std::sqrt(ss / (k - 1.0)) / mean;
}

RelStdReport relative_std(std::span<const int> labels, std::size_t num_modes) {
  RelStdReport r;
  r.modes = count_modes(labels, num_modes);
  r.value = relative_std(r.modes.counts);
  return r;
}

ModulusProfile modulus_probe(const nd::Mlp& psi, const measures::EmpiricalMeasure& sample, std::size_t num_pairs,
                             Rng& rng, std::size_t num_bins) {
  if (num_pairs == 0) throw ContractError("modulus_probe: num_pairs must be >= 1");
  const auto pairs = sample_pairs(sample.size(), num_pairs, rng);
  return modulus_probe(psi, sample, pairs, num_bins);
}

ModulusProfile modulus_probe(const nd::Mlp& psi, const measures::EmpiricalMeasure& sample,
                             std::span<const IndexPair> pairs, std::size_t num_bins) {
  if (pairs.empty()) throw ContractError("modulus_probe: num_pairs must be >= 1");
  if (num_bins == 0) throw ContractError("modulus_probe: num_bins must be >= 1");
  if (psi.spec.output_width() != 1) throw DimensionError("modulus_probe: psi must be scalar-valued");
  const nd::Tensor& x = sample.points();
  const nd::Tensor values = nd::mlp_forward(psi, x);

  std::vector<double> dist;
  std::vector<double> jump;
  for (auto [i, j] : pairs) {
    if (i >= sample.size() || j >= sample.size()) throw ContractError("modulus_probe: pair index out of range");
    double s = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) s += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
    const double d = std::sqrt(s);
    if (d < kMinPairDistance) continue;
    dist.push_back(d);
    jump.push_back(std::abs(values(i, 0) - values(j, 0)));
  }

  ModulusProfile p;
  const double top = dist.empty() ? 1.0 : *std::max_element(dist.begin(), dist.end());
  p.bin_edges.resize(num_bins + 1);
  for (std::size_t b = 0; b <= num_bins; ++b) p.bin_edges[b] = top * static_cast<double>(b) / static_cast<double>(num_bins);
  p.bin_counts.assign(num_bins, 0);
  p.raw_max.assign(num_bins, 0.0);
  for (std::size_t k = 0; k < dist.size(); ++k) {
    const auto b = std::min(num_bins - 1, static_cast<std::size_t>(dist[k] / top * static_cast<double>(num_bins)));
    ++p.bin_counts[b];
    p.raw_max[b] = std::max(p.raw_max[b], jump[k]);
  }
  p.omega = p.raw_max;
  for (std::size_t b = 1; b < num_bins; ++b) p.omega[b] = std::max(p.omega[b], p.omega[b - 1]);
  return p;
}

double fraction_of_bins_below(const ModulusProfile& a, const ModulusProfile& b) {
  if (a.bin_edges != b.bin_edges || a.omega.empty()) {
    throw ContractError("fraction_of_bins_below: profiles must share nonempty bin edges");
  }
  std::size_t below = 0;
  for (std::size_t k = 0; k < a.omega.size(); ++k) below += a.omega[k] <= b.omega[k] ? 1 : 0;
  return static_cast<double>(below) / static_cast<double>(a.omega.size());
}

}  // namespace gmelab::verify
