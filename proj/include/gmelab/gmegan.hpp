#pragma once
// Four-network generative model: generator G (latent -> data), encoder T
// (data -> latent), critic psi (data -> R) and latent map R_inv (latent ->
// latent), trained jointly on
//
//   ot    = E |T(G(y)) - y|^2 / 2
//   gme   = minibatch Gromov-Monge embedding cost of T
//   disc  = E psi(G(y)) - E psi(x)
//   gp    = E |grad psi(x)|^2 at the real samples
//   recon = E |G(R_inv(T(x))) - x|^2
//   total = ot + lambda1 gme + disc + lambda2 gp + lambda3 recon
//
// G, T and R_inv descend on total.  psi ascends on disc and descends on the
// penalty, i.e. it minimizes lambda2 gp - disc.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <ostream>
#include <string>
#include <vector>

#include "gmelab/adam.hpp"
#include "gmelab/measures.hpp"
#include "gmelab/mlp.hpp"
#include "gmelab/otcore.hpp"
#include "gmelab/rng.hpp"

namespace gmelab::gan {

struct Architecture {
  std::vector<std::size_t> hidden{128, 128};
  nd::Activation activation = nd::Activation::relu;
  nd::Activation final_activation = nd::Activation::identity;

  nd::MlpSpec spec(std::size_t in, std::size_t out) const;
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct NetworkBundle {
  nd::Mlp g;      // d -> D
  nd::Mlp t;      // D -> d
  nd::Mlp psi;    // D -> 1
  nd::Mlp r_inv;  // d -> d

  std::size_t latent_dim() const { return g.spec.input_width(); }
  std::size_t ambient_dim() const { return g.spec.output_width(); }
  // Widths chain: out(G) = in(T) = in(psi) = D, out(T) = in(R_inv) = out(R_inv) = in(G) = d.
  void validate() const;

  // Networks in checkpoint order: G, T, psi, R_inv.
  std::vector<nd::Mlp> to_list() const { return {g, t, psi, r_inv}; }
  static NetworkBundle from_list(std::vector<nd::Mlp> nets);
};

struct TrainConfig {
  double lambda1 = 10.0;
  double lambda2 = 1.0;
  double lambda3 = 5.0;
  double lr_g = 1e-4;
  double lr_t = 1e-4;
  double lr_psi = 1e-4;
  double lr_rinv = 1e-4;
  std::size_t batch = 16;
  std::size_t iterations = 20000;
  std::uint64_t seed = 0;
  std::size_t latent_dim = 2;
  Architecture g_arch, t_arch, psi_arch, r_inv_arch;
  ot::Cost cost_x = ot::Cost::log_quadratic();
  ot::Cost cost_y = ot::Cost::log_quadratic();
  // 0 disables periodic checkpoints.
  std::size_t checkpoint_every = 0;
  std::filesystem::path checkpoint_dir;
  // Free-form ablation tags, e.g. "gme" when lambda1 was zeroed.
  std::vector<std::string> ablations;

  void validate() const;
};

// Fresh networks for ambient dimension D, drawn from `rng` in the order G, T, psi, R_inv.
NetworkBundle init_bundle(const TrainConfig& config, std::size_t ambient_dim, Rng& rng);

struct LossBreakdown {
  double ot = 0.0;
  double gme = 0.0;
  double disc = 0.0;
  double gp = 0.0;
  double recon = 0.0;
  double total = 0.0;
};

// Evaluates every term on the given batches (x: m x D real, y: m x d latent).
LossBreakdown assemble_loss(const NetworkBundle& bundle, const nd::Tensor& x, const nd::Tensor& y,
                            const TrainConfig& config);

struct LossGradients {
  LossBreakdown losses;
  std::vector<double> g, t, r_inv;  // d total / d theta
  std::vector<double> psi;          // d (lambda2 gp - disc) / d theta_psi
};

// All four gradients from one graph over the batches.
LossGradients compute_gradients(const NetworkBundle& bundle, const nd::Tensor& x, const nd::Tensor& y,
                                const TrainConfig& config);

struct OptimizerState {
  nd::AdamState g, t, psi, r_inv;
  static OptimizerState for_bundle(const NetworkBundle& bundle);
};

// One simultaneous Adam step per network from a single loss graph.  Returns
// the losses at the pre-update parameters.  Non-finite losses or gradients
// raise NumericError and leave the bundle untouched.
LossBreakdown train_step(NetworkBundle& bundle, OptimizerState& opt, const nd::Tensor& x, const nd::Tensor& y,
                         const TrainConfig& config);

// Index batches of size m from reshuffled passes over {0..n-1}; a pass
// ends when fewer than m unseen indices remain.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t m, Rng rng);
  std::span<const std::size_t> next();
  std::size_t passes_started() const { return passes_; }

 private:
  std::vector<std::size_t> order_;
  std::size_t m_;
  std::size_t cursor_;
  std::size_t passes_ = 0;
  Rng rng_;
};

struct TrainHistory {
  std::vector<LossBreakdown> losses;             // one row per completed iteration
  std::vector<std::filesystem::path> checkpoints;
  std::map<std::string, std::string> metadata;   // seed, lambdas, ablation tags, rng positions
  bool aborted = false;
  std::string abort_reason;
};

struct TrainResult {
  NetworkBundle bundle;
  TrainHistory history;
};

// Called after every iteration with (iteration index, losses); return false to stop early.
using Progress = std::function<bool(std::size_t, const LossBreakdown&)>;

// Runs config.iterations steps on minibatches drawn without replacement from
// a reshuffled pass over the dataset (the final partial batch of a pass is
// dropped) and fresh latent draws each iteration.  A training abort is
// reported through history.aborted; the partial history is kept.
TrainResult train(const measures::EmpiricalMeasure& dataset, const TrainConfig& config,
                  const Progress& progress = {});
// Same, continuing from an existing bundle.
TrainResult train(const measures::EmpiricalMeasure& dataset, const TrainConfig& config, NetworkBundle start,
                  const Progress& progress = {});

struct Generated {
  nd::Tensor latent;                   // n x d
  measures::EmpiricalMeasure samples;  // G(latent), n x D
};

measures::EmpiricalMeasure generate(const NetworkBundle& bundle, std::size_t n, Rng& rng);
Generated generate_with_latent(const NetworkBundle& bundle, std::size_t n, Rng& rng);

// Header `iter,ot,gme,disc,gp,recon,total`.
void write_history_csv(std::ostream& out, const TrainHistory& history);

}  // namespace gmelab::gan
