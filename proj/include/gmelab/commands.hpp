#pragma once
// The four subcommands behind tools/gmelab.  Each returns the process exit code.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gmelab/oracle_suites.hpp"

namespace gmelab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // oracle failure, missing plot artifacts
inline constexpr int kExitConfig = 2;   // bad config, flags or input files
inline constexpr int kExitAbort = 3;    // training aborted on a non-finite value

struct TrainOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> iterations;
  std::vector<std::string> ablate;
  bool quiet = false;
};

// Writes into the run directory: config.cfg (resolved), dataset.gmds,
// checkpoints/, history.csv, generated.csv and summary.json.
int cmd_train(const TrainOptions& options, std::ostream& log);

struct OracleCommand {
  std::string suite;
  OracleOptions options;
  std::optional<std::filesystem::path> out;
};

// Full JSON report on `out`; with an output directory also oracle_<suite>.json
// and, on failure, oracle_<suite>_failures.json.
int cmd_oracle(const OracleCommand& command, std::ostream& out, std::ostream& log);

struct VerifyOptions {
  std::optional<std::filesystem::path> run;  // fills the three paths below from a train output
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

// Writes bilip.csv, latent_embedding.csv, generated_latent.csv, modulus.csv
// and verify.json.
int cmd_verify(const VerifyOptions& options, std::ostream& log);

// The CSVs a complete run directory holds after train + verify.
const std::vector<std::string>& plot_inventory();

// Copies the inventory into `out` (default <run>/plots) and writes manifest.json there.
int cmd_emit_plots(const std::filesystem::path& run_dir, const std::optional<std::filesystem::path>& out,
                   std::ostream& log);

}  // namespace gmelab::cli
