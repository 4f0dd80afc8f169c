#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string_view>

namespace gmelab {

// xoshiro256** with splitmix64 seeding.  Satisfies UniformRandomBitGenerator,
// so it plugs into the <random> distributions.  Child streams are derived from
// the root seed and a tag, never from the parent's current position, so
// adding draws to one stream cannot perturb another.
class Rng {
 public:
  using result_type = std::uint64_t;
  static constexpr std::string_view algorithm = "xoshiro256**";

  explicit Rng(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

  // Independent stream for `tag` (e.g. "data", "init", "latent", "shuffle").
  Rng child(std::string_view tag) const;

  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);    // [lo, hi)
  double normal();                         // N(0, 1)
  std::size_t index(std::size_t n);        // uniform in [0, n)

  std::uint64_t root_seed() const { return root_; }
  const std::array<std::uint64_t, 4>& state() const { return s_; }

 private:
  Rng(std::uint64_t root, std::uint64_t stream_seed);

  std::uint64_t root_;
  std::array<std::uint64_t, 4> s_{};
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t& x);

}  // namespace gmelab
