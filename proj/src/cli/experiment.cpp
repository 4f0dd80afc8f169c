#include "gmelab/experiment.hpp"

#include <chrono>

#include "gmelab/errors.hpp"

namespace gmelab::cli {

measures::Dataset make_dataset(const RunConfig& config) {
  if (!config.dataset.path.empty()) return measures::load_dataset(config.dataset.path);
  Rng rng = Rng(config.seed).child("data");
  auto sample = measures::sample_mixture(mixture_spec(config.dataset), config.dataset.n, rng);
  return {std::move(sample.measure), std::move(sample.labels)};
}

GeneratedSample generate_labeled(const gan::NetworkBundle& bundle, const RunConfig& config) {
  Rng rng = Rng(config.seed).child("generate");
  GeneratedSample out;
  out.draw = gan::generate_with_latent(bundle, config.eval.samples, rng);
  const auto spec = mixture_spec(config.dataset);
  if (out.draw.samples.dim() != spec.ambient_dim) {
    throw DimensionError("generator dimension differs from the configured dataset");
  }
  out.labels = measures::assign_mode(out.draw.samples.points(), spec, config.eval.radius_multiplier);
  out.modes.modes = verify::count_modes(out.labels, spec.num_modes);
  // All-unassigned output is a legitimate (collapsed) outcome, not an error here.
  const bool any = out.modes.modes.unassigned < out.labels.size();
  out.modes.value = any ? verify::relative_std(out.modes.modes.counts) : std::numeric_limits<double>::infinity();
  return out;
}

Diagnostics diagnose(const gan::NetworkBundle& bundle, const measures::Dataset& data, const RunConfig& config) {
  bundle.validate();
  const Rng root(config.seed);
  Diagnostics d;
  d.generated = generate_labeled(bundle, config);

  Rng pair_rng = root.child("bilip");
  const auto pairs = verify::sample_pairs(data.measure.size(), config.eval.bilip_pairs, pair_rng);
  d.bilip = verify::bilip_scatter(ot::network_map(bundle.t), data.measure, pairs);
  Rng init = root.child("init");
  const auto fresh = gan::init_bundle(config.train, data.measure.dim(), init);
  d.bilip_untrained = verify::bilip_scatter(ot::network_map(fresh.t), data.measure, pairs);

  if (bundle.latent_dim() == 2) {
    Rng mono = root.child("monotone");
    d.monotone = verify::monotone2d_check(bundle, config.eval.monotone_probes, mono);
  }
  Rng ccm = root.child("ccm");
  d.ccm = verify::ccm_trained(bundle, config.eval.ccm_probes, config.eval.ccm_cycle_len, ccm, config.eval.ccm_cycles);
  Rng mod = root.child("modulus");
  d.modulus = verify::modulus_probe(bundle.psi, data.measure, config.eval.modulus_pairs, mod, config.eval.modulus_bins);

  d.embedding = nd::mlp_forward(bundle.t, data.measure.points());
  d.embedding_labels = data.labels ? *data.labels
                                   : measures::assign_mode(data.measure.points(), mixture_spec(config.dataset),
                                                           config.eval.radius_multiplier);
  return d;
}

ExperimentResult run_experiment(const RunConfig& config, const gan::Progress& progress) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult r;
  r.data = make_dataset(config);
  r.trained = gan::train(r.data.measure, config.train, progress);
  r.generated = generate_labeled(r.trained.bundle, config);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace gmelab::cli
