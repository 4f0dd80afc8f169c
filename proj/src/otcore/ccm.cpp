#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "gmelab/errors.hpp"
#include "gmelab/otcore.hpp"

namespace gmelab::ot {

CcmReport ccm_check(const nd::Tensor& cost, std::size_t max_cycle_len, double tol) {
  const std::size_t n = cost.rows();
  if (cost.cols() != n) throw DimensionError("ccm_check: cost matrix must be square");
  if (max_cycle_len < 2 || max_cycle_len > kMaxCycleLength) {
    throw ContractError("ccm_check: max_cycle_len must be in [2, " + std::to_string(kMaxCycleLength) + "]");
  }
  cost.require_finite("ccm_check cost matrix");

  CcmReport report;
  report.worst_violation = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> worst_subset, worst_perm;

  for (std::size_t k = 2; k <= std::min(max_cycle_len, n); ++k) {
    // Lexicographic k-subsets of {0..n-1}.
    std::vector<std::size_t> subset(k);
    std::iota(subset.begin(), subset.end(), 0);
    while (true) {
      double matched = 0.0;
      for (std::size_t s : subset) matched += cost(s, s);
      std::vector<std::size_t> perm(k);
      std::iota(perm.begin(), perm.end(), 0);
      while (std::next_permutation(perm.begin(), perm.end())) {
        double swapped = 0.0;
        for (std::size_t t = 0; t < k; ++t) swapped += cost(subset[perm[t]], subset[t]);
        const double violation = matched - swapped;
        ++report.cycles_tested;
        if (violation <= tol) ++report.cycles_passed;
        if (violation > report.worst_violation) {
          report.worst_violation = violation;
          worst_subset = subset;
          worst_perm = perm;
        }
      }

      std::size_t pos = k;
      while (pos > 0 && subset[pos - 1] == n - k + pos - 1) --pos;
      if (pos == 0) break;
      ++subset[pos - 1];
      for (std::size_t t = pos; t < k; ++t) subset[t] = subset[t - 1] + 1;
    }
  }

  if (report.cycles_tested == 0) report.worst_violation = 0.0;
  report.is_ccm = report.cycles_passed == report.cycles_tested;
  if (!report.is_ccm) {
    report.witness.resize(n);
    std::iota(report.witness.begin(), report.witness.end(), 0);
    for (std::size_t t = 0; t < worst_subset.size(); ++t) report.witness[worst_subset[t]] = worst_subset[worst_perm[t]];
  }
  return report;
}

CcmReport ccm_check(const nd::Tensor& xs, const nd::Tensor& ys, const Cost& cost, std::size_t max_cycle_len,
                    double tol) {
  if (xs.rows() != ys.rows()) throw DimensionError("ccm_check: Gamma needs as many x's as y's");
  return ccm_check(pairwise_cost(cost, xs, ys), max_cycle_len, tol);
}

}  // namespace gmelab::ot
