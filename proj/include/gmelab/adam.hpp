#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gmelab::nd {

struct AdamState {
  std::uint64_t step_count = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_parameters(std::size_t n, double beta1 = 0.5, double beta2 = 0.999,
                                  double eps = 1e-8);
};

// One bias-corrected Adam descent step: params -= lr * m_hat / (sqrt(v_hat) + eps).
// Throws ContractError on length mismatch.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, double lr);

}  // namespace gmelab::nd
