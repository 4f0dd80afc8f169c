#pragma once
// Randomized oracle suites.  Instance i of suite s draws from
// Rng(seed).child(s + "/" + i), so any failing instance replays alone.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace gmelab::cli {

struct OracleOptions {
  std::uint64_t seed = 0;
  std::size_t count = 0;          // 0 = suite default
  std::optional<std::size_t> k;   // gk only; default runs k in {0, 2, 5}
  std::size_t grid = 10000;       // gk only
};

struct OracleOutcome {
  std::string suite;
  std::size_t instances = 0;
  std::size_t passed = 0;
  nlohmann::json results = nlohmann::json::array();   // one summary per instance
  nlohmann::json failures = nlohmann::json::array();  // full instance data for replay

  bool pass() const { return instances > 0 && passed == instances; }
  nlohmann::json to_json() const;
};

// ot, gme, kset, lemma41, thm42, ccm, sandwich, gk
const std::vector<std::string>& oracle_suites();
std::size_t default_count(const std::string& suite);

// ContractError for an unknown suite.
OracleOutcome run_oracle(const std::string& suite, const OracleOptions& options);

}  // namespace gmelab::cli
