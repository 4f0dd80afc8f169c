#include "gmelab/rng.hpp"

#include <bit>

namespace gmelab {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : Rng(seed, seed) {}

Rng::Rng(std::uint64_t root, std::uint64_t stream_seed) : root_(root) {
  std::uint64_t x = stream_seed;
  for (auto& w : s_) w = splitmix64(x);
}

Rng::result_type Rng::operator()() {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

Rng Rng::child(std::string_view tag) const {
  // FNV-1a over the tag, mixed with the root seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t x = root_ ^ h;
  return Rng(root_, splitmix64(x));
}

double Rng::uniform() { return uniform_(*this); }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(*this); }

double Rng::normal() { return normal_(*this); }

std::size_t Rng::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> d(0, n - 1);
  return d(*this);
}

}  // namespace gmelab
