// gmelab {train|oracle|verify|emit-plots} [--config PATH] [--seed N] [--out DIR] [flags]

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "gmelab/commands.hpp"

namespace fs = std::filesystem;
using namespace gmelab::cli;

int main(int argc, char** argv) {
  CLI::App app{"Gromov-Monge embedding GAN: training, oracles and diagnostics"};
  app.require_subcommand(1);

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "train on the configured dataset");
  train_cmd->add_option("--config", train.config, "run config file");
  train_cmd->add_option("--seed", train.seed, "root seed (overrides GMEGAN_SEED and the file)");
  train_cmd->add_option("--out", train.out, "run directory");
  train_cmd->add_option("--iterations", train.iterations, "override the iteration budget");
  train_cmd->add_option("--ablate", train.ablate, "zero a loss weight: gme, gp or recon (repeatable)");
  train_cmd->add_flag("--quiet", train.quiet, "no progress lines");

  OracleCommand oracle;
  std::optional<std::size_t> oracle_k;
  auto* oracle_cmd = app.add_subcommand("oracle", "run a randomized oracle suite");
  oracle_cmd->add_option("suite", oracle.suite, "ot, gme, kset, lemma41, thm42, ccm, sandwich or gk")->required();
  oracle_cmd->add_option("--seed", oracle.options.seed, "root seed");
  oracle_cmd->add_option("--count", oracle.options.count, "number of instances (0 = suite default)");
  oracle_cmd->add_option("--k", oracle_k, "gk: number of teeth");
  oracle_cmd->add_option("--grid", oracle.options.grid, "gk: grid size");
  oracle_cmd->add_option("--out", oracle.out, "directory for the JSON report");

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "diagnostics for a trained checkpoint");
  verify_cmd->add_option("--run", verify.run, "run directory written by train");
  verify_cmd->add_option("--checkpoint", verify.checkpoint, "checkpoint file");
  verify_cmd->add_option("--dataset", verify.dataset, "dataset file");
  verify_cmd->add_option("--config", verify.config, "run config (mixture layout and eval settings)");
  verify_cmd->add_option("--seed", verify.seed, "root seed for the probes");
  verify_cmd->add_option("--out", verify.out, "output directory");

  fs::path plots_run;
  std::optional<fs::path> plots_out;
  auto* plots_cmd = app.add_subcommand("emit-plots", "collect plot CSVs and a manifest");
  plots_cmd->add_option("run", plots_run, "run directory")->required();
  plots_cmd->add_option("--out", plots_out, "destination (default <run>/plots)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*train_cmd) return cmd_train(train, std::cerr);
  if (*oracle_cmd) {
    oracle.options.k = oracle_k;
    return cmd_oracle(oracle, std::cout, std::cerr);
  }
  if (*verify_cmd) return cmd_verify(verify, std::cerr);
  return cmd_emit_plots(plots_run, plots_out, std::cerr);
}
