#pragma once
// Brute-force oracles for the transport / embedding theorems on small
// discrete instances, plus diagnostics for trained bundles.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gmelab/gmegan.hpp"
#include "gmelab/measures.hpp"
#include "gmelab/otcore.hpp"
#include "gmelab/rng.hpp"
#include "gmelab/tensor.hpp"

namespace gmelab::verify {

// Pairs closer than this are skipped by every ratio diagnostic.
inline constexpr double kMinPairDistance = 1e-9;
// Hard gate for the discrete oracles.
inline constexpr double kOracleTolerance = 1e-9;
// Gates for trained bundles.
inline constexpr double kTrainedCcmTolerance = 1e-6;
inline constexpr double kTrainedGate = 0.95;

// Linear-interpolation quantiles (type 7).  All NaN for an empty input.
struct Quantiles {
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;

  double iqr() const { return q75 - q25; }
};
Quantiles quantiles(std::vector<double> values);

using IndexPair = std::pair<std::size_t, std::size_t>;

// Ordered pairs (i, j), i != j, uniform over {0..n-1}^2 minus the diagonal.
std::vector<IndexPair> sample_pairs(std::size_t n, std::size_t num_pairs, Rng& rng);

struct BiLipPair {
  double distance = 0.0;  // |x - x'|
  double ratio = 0.0;     // |T x - T x'| / |x - x'|
};

struct BiLipReport {
  std::vector<BiLipPair> pairs;
  std::size_t excluded = 0;  // pairs below kMinPairDistance
  Quantiles ratio;
};

// ContractError if num_pairs == 0 or every point of the sample coincides.
BiLipReport bilip_scatter(const ot::PointMap& t, const measures::EmpiricalMeasure& sample, std::size_t num_pairs,
                          Rng& rng);
// Same, on a fixed pair list (lets two maps be compared on identical pairs).
BiLipReport bilip_scatter(const ot::PointMap& t, const measures::EmpiricalMeasure& sample,
                          std::span<const IndexPair> pairs);

// Every ordered pair (x, x') with weight w w' is put in
//   K: alpha <= r <= 1/alpha,  B: r > 1/alpha,  Q: r < alpha,
// r = (|Tx - Tx'|^2 + 1) / (|x - x'|^2 + 1).  eps = GM(T, mu) with the log
// cost on both sides.
struct KSetReport {
  double alpha = 0.0;
  double gamma = 0.0;
  double epsilon = 0.0;
  double mass_in_k = 0.0;
  double mass_in_b = 0.0;
  double mass_in_q = 0.0;
  double bound = 0.0;  // 1 - eps / (log alpha)^2
  std::size_t count_k = 0;
  std::size_t count_b = 0;
  std::size_t count_q = 0;
  // K pairs with |x - x'|^2 >= (1 - alpha) / (alpha gamma) and how many of
  // them break alpha (1 - gamma) d^2 <= |Tx - Tx'|^2 <= (1/alpha + gamma) d^2.
  double separation = 0.0;
  std::size_t separated_pairs = 0;
  std::size_t bilip_violations = 0;
  bool measure_bound_holds = false;
  bool pass = false;
};
KSetReport kset_check(const ot::PointMap& t, const measures::EmpiricalMeasure& mu, double alpha, double gamma);

// min over support pairs of min(ratio, 1/ratio); 1 when no pair is separated.
double bilipschitz_constant(const ot::PointMap& t, const nd::Tensor& points);

struct SandwichReport {
  double alpha = 0.0;
  double p = 0.0;
  double w_source = 0.0;  // W_p(a, b)
  double w_image = 0.0;   // W_p(T#a, T#b)
  double lower_slack = 0.0;  // w_source - alpha w_image
  double upper_slack = 0.0;  // w_image / alpha - w_source
  bool pass = false;
};
// alpha W_p(T#a, T#b) <= W_p(a, b) <= W_p(T#a, T#b) / alpha with alpha taken
// over the union of both supports.
SandwichReport prop21_sandwich(const ot::PointMap& t, const measures::EmpiricalMeasure& a,
                               const measures::EmpiricalMeasure& b, double p);

struct EqualityReport {
  double ot_ct = 0.0;       // exact OT under c_T(x, y) = |T x - y|^2 / 2
  double w2_half_sq = 0.0;  // W_2(T#mu, nu)^2 / 2
  double delta = 0.0;
  bool pass = false;
};
// ContractError unless mu and nu are equal-size uniform and T is injective on supp(mu).
EqualityReport lemma41_equality(const ot::PointMap& t, const measures::EmpiricalMeasure& mu,
                                const measures::EmpiricalMeasure& nu);

struct PushforwardReport {
  nd::Tensor g_star;                 // row j = G*(y_j)
  std::vector<std::size_t> r_star;   // y_j -> row r_star[j] of T#mu
  double multiset_error = 0.0;       // max matched distance between G*#nu and mu
  double cost_g_star = 0.0;          // mean c_T(G*(y_j), y_j)
  double ot_ct = 0.0;
  double cost_gap = 0.0;
  bool pass = false;
};
// T x = x M with M square and invertible; G* = T^-1 o R*.
PushforwardReport thm42_pushforward(const nd::Tensor& t_matrix, const measures::EmpiricalMeasure& mu,
                                    const measures::EmpiricalMeasure& nu);

// Gamma = {(G(y_i), y_i)} for n_probe latent draws under c_T; num_cycles
// random cycles of length 2..cycle_len (uniform) are tested.
ot::CcmReport ccm_trained(const gan::NetworkBundle& bundle, std::size_t n_probe, std::size_t cycle_len, Rng& rng,
                          std::size_t num_cycles = 1000, double tol = kTrainedCcmTolerance);

// Fraction of unordered pairs among n_probe latent draws with
// <T(G(y)) - T(G(y')), y - y'> >= 0.  Latent dimension must be 2.
double monotone2d_check(const gan::NetworkBundle& bundle, std::size_t n_probe, Rng& rng);

// Sawtooth with k teeth on [0, 1]; G_0 is the identity.
double sawtooth(std::size_t k, double x);
// Kolmogorov-Smirnov distance between the sample's ECDF and U[0, 1].
double ks_uniform(std::vector<double> sample);
// KS of G_k applied to the grid (j + 0.5) / n.  ContractError if n < 100.
double gk_pushforward_demo(std::size_t k, std::size_t n);

struct ModeCounts {
  std::vector<std::size_t> counts;
  std::size_t unassigned = 0;
};
ModeCounts count_modes(std::span<const int> labels, std::size_t num_modes);

// sigma / mu of the counts, sigma with K - 1 in the denominator.
double relative_std(std::span<const std::size_t> counts);

struct RelStdReport {
  double value = 0.0;
  ModeCounts modes;
};
// Unassigned labels are excluded and reported; ContractError if all are unassigned.
RelStdReport relative_std(std::span<const int> labels, std::size_t num_modes);

struct ModulusProfile {
  std::vector<double> bin_edges;  // num_bins + 1, from 0 to the largest distance
  std::vector<std::size_t> bin_counts;
  std::vector<double> raw_max;    // max |psi x - psi x'| per bin, 0 when empty
  std::vector<double> omega;      // running max of raw_max
};
ModulusProfile modulus_probe(const nd::Mlp& psi, const measures::EmpiricalMeasure& sample, std::size_t num_pairs,
                             Rng& rng, std::size_t num_bins = 20);
ModulusProfile modulus_probe(const nd::Mlp& psi, const measures::EmpiricalMeasure& sample,
                             std::span<const IndexPair> pairs, std::size_t num_bins = 20);

// Fraction of bins where a.omega <= b.omega.  Profiles must share bin edges.
double fraction_of_bins_below(const ModulusProfile& a, const ModulusProfile& b);

}  // namespace gmelab::verify
