#pragma once
// Run configuration: an INI-style file with [run], [dataset], [train] and
// [eval] sections.  Every field has a default, so an empty file describes
// the 9-mode, 100-D scenario.  Unknown sections or keys are rejected.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "gmelab/gmegan.hpp"
#include "gmelab/measures.hpp"

namespace gmelab::cli {

struct DatasetSection {
  std::string scenario = "nine";  // nine | twelve
  std::size_t ambient_dim = 100;
  std::size_t n = 1000;
  double var_leading = 0.3;
  double var_trailing = 0.003;
  std::filesystem::path path;     // load a GMDS file instead of sampling
};

struct EvalSection {
  std::size_t samples = 10000;
  double radius_multiplier = 3.0;
  std::size_t bilip_pairs = 2000;
  std::size_t monotone_probes = 200;
  std::size_t ccm_probes = 200;
  std::size_t ccm_cycles = 1000;
  std::size_t ccm_cycle_len = 3;
  std::size_t modulus_pairs = 5000;
  std::size_t modulus_bins = 20;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out = "runs/default";
  DatasetSection dataset;
  gan::TrainConfig train;  // train.seed mirrors `seed`
  EvalSection eval;

  void validate() const;
};

// FormatError on syntax errors, unknown keys or unparsable values.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::filesystem::path& path);
// Writes every field, so the output reloads to an identical config.
void write_run_config(std::ostream& out, const RunConfig& config);

// Applies an ablation tag: gme -> lambda1 = 0, gp -> lambda2 = 0, recon -> lambda3 = 0.
void apply_ablation(RunConfig& config, const std::string& tag);

// Seed precedence: explicit flag, then GMEGAN_SEED, then the file.
void resolve_seed(RunConfig& config, std::optional<std::uint64_t> flag);

measures::GaussianMixtureSpec mixture_spec(const DatasetSection& dataset);

}  // namespace gmelab::cli
