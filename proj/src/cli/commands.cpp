#include "gmelab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "gmelab/checkpoint.hpp"
#include "gmelab/csv.hpp"
#include "gmelab/errors.hpp"
#include "gmelab/experiment.hpp"
#include "gmelab/run_config.hpp"
#include "gmelab/verify_io.hpp"

namespace gmelab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const fs::path& path, const json& j) {
  auto out = csv::open_for_write(path);
  out << j.dump(2) << '\n';
}

json losses_json(const gan::LossBreakdown& l) {
  return {{"ot", l.ot}, {"gme", l.gme}, {"disc", l.disc}, {"gp", l.gp}, {"recon", l.recon}, {"total", l.total}};
}

// Columns y0..y{d-1}, x0..x{D-1}, label.
void write_generated_csv(const fs::path& path, const GeneratedSample& g) {
  auto out = csv::open_for_write(path);
  const auto& y = g.draw.latent;
  const auto& x = g.draw.samples.points();
  std::vector<std::string> row;
  for (std::size_t c = 0; c < y.cols(); ++c) row.push_back("y" + std::to_string(c));
  for (std::size_t c = 0; c < x.cols(); ++c) row.push_back("x" + std::to_string(c));
  row.push_back("label");
  csv::write_row(out, row);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    row.clear();
    for (double v : y.row(i)) row.push_back(csv::format_double(v));
    for (double v : x.row(i)) row.push_back(csv::format_double(v));
    row.push_back(std::to_string(g.labels[i]));
    csv::write_row(out, row);
  }
}

json modes_json(const verify::RelStdReport& r) {
  json j = verify::to_json(r);
  if (!std::isfinite(r.value)) j["relative_std"] = nullptr;
  return j;
}

fs::path latest_checkpoint(const fs::path& dir) {
  std::vector<fs::path> found;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".gmeg") found.push_back(e.path());
    }
  }
  if (found.empty()) throw FormatError("no checkpoints in " + dir.string());
  return *std::max_element(found.begin(), found.end());
}

template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const FormatError& e) {
    log << "error: " << e.what() << '\n';
  } catch (const ContractError& e) {
    log << "error: " << e.what() << '\n';
  } catch (const DimensionError& e) {
    log << "error: " << e.what() << '\n';
  }
  return kExitConfig;
}

}  // namespace

int cmd_train(const TrainOptions& options, std::ostream& log) {
  RunConfig config;
  const int setup = guarded(log, [&] {
    if (options.config) config = load_run_config(*options.config);
    resolve_seed(config, options.seed);
    if (options.out) config.out = *options.out;
    if (options.iterations) config.train.iterations = *options.iterations;
    for (const auto& tag : options.ablate) apply_ablation(config, tag);
    config.validate();
    return kExitOk;
  });
  if (setup != kExitOk) return setup;

  const fs::path dir = config.out;
  fs::create_directories(dir);
  config.train.checkpoint_dir = dir / "checkpoints";
  {
    auto out = csv::open_for_write(dir / "config.cfg");
    write_run_config(out, config);
  }

  const std::size_t every = std::max<std::size_t>(1, config.train.iterations / 10);
  const auto progress = [&](std::size_t it, const gan::LossBreakdown& l) {
    if (!options.quiet && (it % every == 0 || it + 1 == config.train.iterations)) {
      log << "iter " << it << " total " << l.total << " ot " << l.ot << " gme " << l.gme << " disc " << l.disc
          << '\n';
    }
    return true;
  };
  ExperimentResult r;
  const int trained = guarded(log, [&] {
    r = run_experiment(config, progress);
    return kExitOk;
  });
  if (trained != kExitOk) return trained;

  const std::vector<int>* labels = r.data.labels ? &*r.data.labels : nullptr;
  measures::save_dataset(dir / "dataset.gmds", r.data.measure.points(), labels);
  {
    auto out = csv::open_for_write(dir / "history.csv");
    gan::write_history_csv(out, r.trained.history);
  }
  write_generated_csv(dir / "generated.csv", r.generated);

  const auto& h = r.trained.history;
  json checkpoints = json::array();
  for (const auto& c : h.checkpoints) checkpoints.push_back(c.filename().string());
  json summary = {{"seed", config.seed},
                  {"metadata", h.metadata},
                  {"aborted", h.aborted},
                  {"abort_reason", h.abort_reason},
                  {"final_losses", h.losses.empty() ? json(nullptr) : losses_json(h.losses.back())},
                  {"modes", modes_json(r.generated.modes)},
                  {"checkpoints", checkpoints},
                  {"seconds", r.seconds}};
  write_json(dir / "summary.json", summary);

  if (h.aborted) {
    log << "training aborted: " << h.abort_reason << '\n';
    return kExitAbort;
  }
  log << "wrote " << dir.string() << " (relative std " << r.generated.modes.value << ")\n";
  return kExitOk;
}

int cmd_oracle(const OracleCommand& command, std::ostream& out, std::ostream& log) {
  OracleOutcome outcome;
  const int setup = guarded(log, [&] {
    outcome = run_oracle(command.suite, command.options);
    return kExitOk;
  });
  if (setup != kExitOk) return setup;

  const json report = outcome.to_json();
  out << report.dump(2) << '\n';
  if (command.out) {
    fs::create_directories(*command.out);
    write_json(*command.out / ("oracle_" + command.suite + ".json"), report);
    if (!outcome.pass()) write_json(*command.out / ("oracle_" + command.suite + "_failures.json"), outcome.failures);
  }
  log << command.suite << ": " << outcome.passed << "/" << outcome.instances << " passed\n";
  return outcome.pass() ? kExitOk : kExitFailure;
}

int cmd_verify(const VerifyOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    fs::path checkpoint, dataset, out = ".";
    std::optional<fs::path> config_path = options.config;
    if (options.run) {
      checkpoint = latest_checkpoint(*options.run / "checkpoints");
      dataset = *options.run / "dataset.gmds";
      out = *options.run;
      if (!config_path) config_path = *options.run / "config.cfg";
    }
    if (options.checkpoint) checkpoint = *options.checkpoint;
    if (options.dataset) dataset = *options.dataset;
    if (options.out) out = *options.out;
    if (checkpoint.empty() || dataset.empty()) throw FormatError("verify needs --run or both --checkpoint and --dataset");

    RunConfig config = config_path ? load_run_config(*config_path) : RunConfig{};
    resolve_seed(config, options.seed);
    const auto bundle = gan::NetworkBundle::from_list(nd::load_checkpoint(checkpoint));
    const auto data = measures::load_dataset(dataset);
    if (data.measure.dim() != config.dataset.ambient_dim) {
      throw DimensionError("dataset dimension " + std::to_string(data.measure.dim()) +
                           " differs from the config's ambient_dim; pass the run's --config");
    }
    const Diagnostics d = diagnose(bundle, data, config);

    fs::create_directories(out);
    {
      auto f = csv::open_for_write(out / "bilip.csv");
      verify::write_bilip_csv(f, d.bilip);
    }
    {
      auto f = csv::open_for_write(out / "latent_embedding.csv");
      std::vector<std::string> row;
      for (std::size_t c = 0; c < d.embedding.cols(); ++c) row.push_back("t" + std::to_string(c));
      row.push_back("label");
      csv::write_row(f, row);
      for (std::size_t i = 0; i < d.embedding.rows(); ++i) {
        row.clear();
        for (double v : d.embedding.row(i)) row.push_back(csv::format_double(v));
        row.push_back(std::to_string(d.embedding_labels[i]));
        csv::write_row(f, row);
      }
    }
    {
      // Latent draws with their radius next to the first two coordinates of G(y).
      auto f = csv::open_for_write(out / "generated_latent.csv");
      const auto& y = d.generated.draw.latent;
      const auto& x = d.generated.draw.samples.points();
      std::vector<std::string> row;
      for (std::size_t c = 0; c < y.cols(); ++c) row.push_back("y" + std::to_string(c));
      row.insert(row.end(), {"radius", "g0", "g1", "label"});
      csv::write_row(f, row);
      for (std::size_t i = 0; i < y.rows(); ++i) {
        row.clear();
        double r2 = 0.0;
        for (double v : y.row(i)) {
          row.push_back(csv::format_double(v));
          r2 += v * v;
        }
        row.push_back(csv::format_double(std::sqrt(r2)));
        row.push_back(csv::format_double(x(i, 0)));
        row.push_back(csv::format_double(x(i, 1)));
        row.push_back(std::to_string(d.generated.labels[i]));
        csv::write_row(f, row);
      }
    }
    {
      auto f = csv::open_for_write(out / "modulus.csv");
      verify::write_modulus_csv(f, d.modulus);
    }

    const auto& counts = d.generated.modes.modes.counts;
    const double floor = 0.01 * static_cast<double>(config.eval.samples);
    const bool covered =
        std::all_of(counts.begin(), counts.end(), [&](std::size_t c) { return static_cast<double>(c) >= floor; });
    const double ccm_fraction =
        d.ccm.cycles_tested ? static_cast<double>(d.ccm.cycles_passed) / static_cast<double>(d.ccm.cycles_tested) : 1.0;
    json gates = {
        {"coverage_all_modes_1pct", covered},
        {"relative_std_le_0.35", std::isfinite(d.generated.modes.value) && d.generated.modes.value <= 0.35},
        {"monotone2d_ge_0.95", d.monotone >= verify::kTrainedGate},
        {"ccm_fraction_ge_0.95", ccm_fraction >= verify::kTrainedGate},
        {"bilip_median_in_0.5_2", d.bilip.ratio.median >= 0.5 && d.bilip.ratio.median <= 2.0},
        {"bilip_iqr_below_untrained", d.bilip.ratio.iqr() < d.bilip_untrained.ratio.iqr()}};
    json report = {{"checkpoint", checkpoint.filename().string()},
                   {"seed", config.seed},
                   {"modes", modes_json(d.generated.modes)},
                   {"monotone2d", d.monotone},
                   {"ccm", verify::to_json(d.ccm)},
                   {"bilip", verify::to_json(d.bilip)},
                   {"bilip_untrained", verify::to_json(d.bilip_untrained)},
                   {"modulus", verify::to_json(d.modulus)},
                   {"gates", gates}};
    write_json(out / "verify.json", report);
    log << "relative std " << d.generated.modes.value << ", monotone2d " << d.monotone << ", ccm fraction "
        << ccm_fraction << ", bilip median " << d.bilip.ratio.median << '\n';
    return kExitOk;
  });
}

const std::vector<std::string>& plot_inventory() {
  static const std::vector<std::string> files{"history.csv",          "generated.csv",        "bilip.csv",
                                              "latent_embedding.csv", "generated_latent.csv", "modulus.csv"};
  return files;
}

int cmd_emit_plots(const fs::path& run_dir, const std::optional<fs::path>& out, std::ostream& log) {
  return guarded(log, [&] {
    const fs::path target = out ? *out : run_dir / "plots";
    fs::create_directories(target);
    json files = json::array();
    json missing = json::array();
    for (const auto& name : plot_inventory()) {
      const fs::path src = run_dir / name;
      if (!fs::is_regular_file(src)) {
        missing.push_back(name);
        files.push_back({{"name", name}, {"present", false}});
        continue;
      }
      fs::copy_file(src, target / name, fs::copy_options::overwrite_existing);
      std::ifstream in(src, std::ios::binary);
      std::string header;
      std::getline(in, header);
      std::size_t rows = 0;
      for (std::string line; std::getline(in, line);) ++rows;
      files.push_back({{"name", name},
                       {"present", true},
                       {"bytes", fs::file_size(src)},
                       {"rows", rows},
                       {"columns", std::count(header.begin(), header.end(), ',') + 1}});
    }
    const json manifest = {{"files", files}, {"missing", missing}, {"complete", missing.empty()}};
    write_json(target / "manifest.json", manifest);
    if (!missing.empty()) {
      log << "missing artifacts:";
      for (const auto& m : missing) log << ' ' << m.get<std::string>();
      log << '\n';
      return kExitFailure;
    }
    log << "wrote " << (target / "manifest.json").string() << '\n';
    return kExitOk;
  });
}

}  // namespace gmelab::cli
