#pragma once
// End-to-end synthetic runs: dataset, training, generation and the
// diagnostics reported for a trained bundle.  Every random stream is a
// child of Rng(config.seed): "data", "generate", "bilip", "monotone",
// "ccm", "modulus" (training adds its own "init", "latent", "shuffle").

#include <cstddef>
#include <filesystem>
#include <vector>

#include "gmelab/gmegan.hpp"
#include "gmelab/measures.hpp"
#include "gmelab/run_config.hpp"
#include "gmelab/verify.hpp"

namespace gmelab::cli {

// The configured dataset: loaded from dataset.path, else sampled from the mixture.
measures::Dataset make_dataset(const RunConfig& config);

struct GeneratedSample {
  gan::Generated draw;      // latent and G(latent)
  std::vector<int> labels;  // assign_mode of G(latent)
  verify::RelStdReport modes;
};

GeneratedSample generate_labeled(const gan::NetworkBundle& bundle, const RunConfig& config);

struct Diagnostics {
  GeneratedSample generated;
  verify::BiLipReport bilip;            // trained encoder
  verify::BiLipReport bilip_untrained;  // freshly initialized encoder, same pairs
  double monotone = 0.0;
  ot::CcmReport ccm;
  verify::ModulusProfile modulus;
  nd::Tensor embedding;                 // T applied to the dataset
  std::vector<int> embedding_labels;    // dataset labels, else assign_mode
};

Diagnostics diagnose(const gan::NetworkBundle& bundle, const measures::Dataset& data, const RunConfig& config);

struct ExperimentResult {
  measures::Dataset data;
  gan::TrainResult trained;
  GeneratedSample generated;
  double seconds = 0.0;
};

// Trains on make_dataset(config).  Checkpoints go to config.train.checkpoint_dir when set.
ExperimentResult run_experiment(const RunConfig& config, const gan::Progress& progress = {});

}  // namespace gmelab::cli
