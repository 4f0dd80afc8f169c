#include "gmelab/gmegan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "gmelab/checkpoint.hpp"
#include "gmelab/csv.hpp"
#include "gmelab/errors.hpp"

namespace gmelab::gan {

namespace {

void require_chain(bool ok, const std::string& what) {
  if (!ok) throw DimensionError("bundle: " + what);
}

struct Graph {
  nd::Var g, t, psi, r_inv;
  nd::Var ot, gme, disc, gp, recon, total, psi_objective;
};

Graph build_graph(nd::Tape& tape, const NetworkBundle& b, const nd::Tensor& x, const nd::Tensor& y,
                  const TrainConfig& cfg) {
  const std::size_t m = x.rows();
  if (m < 2 || y.rows() != m) {
    throw DimensionError("loss: need matching batches of at least 2 rows, got " + std::to_string(m) + " and " +
                         std::to_string(y.rows()));
  }
  if (x.cols() != b.ambient_dim() || y.cols() != b.latent_dim()) {
    throw DimensionError("loss: batch widths do not match the bundle");
  }
  const double inv_m = 1.0 / static_cast<double>(m);

  Graph gr;
  gr.g = tape.variable(nd::Tensor::row_vector(b.g.params));
  gr.t = tape.variable(nd::Tensor::row_vector(b.t.params));
  gr.psi = tape.variable(nd::Tensor::row_vector(b.psi.params));
  gr.r_inv = tape.variable(nd::Tensor::row_vector(b.r_inv.params));
  nd::Var xv = tape.constant(x);
  nd::Var yv = tape.constant(y);

  nd::Var gy = nd::mlp_forward(b.g.spec, gr.g, yv);
  nd::Var cycle = nd::sub(nd::mlp_forward(b.t.spec, gr.t, gy), yv);
  gr.ot = nd::scale(nd::sum(nd::mul(cycle, cycle)), 0.5 * inv_m);

  nd::Var tx = nd::mlp_forward(b.t.spec, gr.t, xv);
  gr.gme = ot::gme_minibatch(x, tx, cfg.cost_x, cfg.cost_y);

  gr.disc = nd::sub(nd::mean(nd::mlp_forward(b.psi.spec, gr.psi, gy)), nd::mean(nd::mlp_forward(b.psi.spec, gr.psi, xv)));
  gr.gp = nd::gradient_penalty(b.psi.spec, gr.psi, x);

  nd::Var back = nd::sub(nd::mlp_forward(b.g.spec, gr.g, nd::mlp_forward(b.r_inv.spec, gr.r_inv, tx)), xv);
  gr.recon = nd::scale(nd::sum(nd::mul(back, back)), inv_m);

  gr.total = nd::add(nd::add(nd::add(gr.ot, nd::scale(gr.gme, cfg.lambda1)), nd::add(gr.disc, nd::scale(gr.gp, cfg.lambda2))),
                     nd::scale(gr.recon, cfg.lambda3));
  gr.psi_objective = nd::sub(nd::scale(gr.gp, cfg.lambda2), gr.disc);
  return gr;
}

LossBreakdown values(const Graph& gr) {
  return {gr.ot.value().item(),   gr.gme.value().item(),   gr.disc.value().item(),
          gr.gp.value().item(),   gr.recon.value().item(), gr.total.value().item()};
}

void require_finite(const std::vector<double>& grad, const char* net) {
  for (double v : grad) {
    if (!std::isfinite(v)) throw NumericError(std::string("train_step: non-finite gradient for ") + net);
  }
}

std::string format_checkpoint_name(std::size_t iter) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt_%06zu.gmeg", iter);
  return buf;
}

}  // namespace

nd::MlpSpec Architecture::spec(std::size_t in, std::size_t out) const {
  std::vector<std::size_t> widths{in};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(out);
  nd::MlpSpec s = nd::MlpSpec::uniform(std::move(widths), activation, final_activation);
  s.validate();
  return s;
}

void NetworkBundle::validate() const {
  for (const nd::Mlp* n : {&g, &t, &psi, &r_inv}) n->validate();
  const std::size_t d = latent_dim(), big_d = ambient_dim();
  require_chain(t.spec.input_width() == big_d, "T input must equal G output");
  require_chain(psi.spec.input_width() == big_d, "psi input must equal G output");
  require_chain(psi.spec.output_width() == 1, "psi must have a single output");
  require_chain(t.spec.output_width() == d, "T output must equal the latent dimension");
  require_chain(r_inv.spec.input_width() == d && r_inv.spec.output_width() == d, "R_inv must map latent to latent");
}

NetworkBundle NetworkBundle::from_list(std::vector<nd::Mlp> nets) {
  if (nets.size() != 4) throw FormatError("bundle: expected 4 networks, found " + std::to_string(nets.size()));
  NetworkBundle b{std::move(nets[0]), std::move(nets[1]), std::move(nets[2]), std::move(nets[3])};
  b.validate();
  return b;
}

void TrainConfig::validate() const {
  for (double l : {lambda1, lambda2, lambda3}) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ContractError("config: lambdas must be finite and nonnegative");
  }
  for (double lr : {lr_g, lr_t, lr_psi, lr_rinv}) {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ContractError("config: learning rates must be finite and nonnegative");
  }
  if (batch < 2) throw ContractError("config: batch must be at least 2");
  if (latent_dim == 0) throw ContractError("config: latent_dim must be positive");
}

NetworkBundle init_bundle(const TrainConfig& config, std::size_t ambient_dim, Rng& rng) {
  const std::size_t d = config.latent_dim;
  NetworkBundle b;
  b.g.spec = config.g_arch.spec(d, ambient_dim);
  b.t.spec = config.t_arch.spec(ambient_dim, d);
  b.psi.spec = config.psi_arch.spec(ambient_dim, 1);
  b.r_inv.spec = config.r_inv_arch.spec(d, d);
  for (nd::Mlp* n : {&b.g, &b.t, &b.psi, &b.r_inv}) n->params = nd::init_params(n->spec, rng);
  return b;
}

LossBreakdown assemble_loss(const NetworkBundle& bundle, const nd::Tensor& x, const nd::Tensor& y,
                            const TrainConfig& config) {
  bundle.validate();
  nd::Tape tape;
  return values(build_graph(tape, bundle, x, y, config));
}

OptimizerState OptimizerState::for_bundle(const NetworkBundle& b) {
  return {nd::AdamState::for_parameters(b.g.params.size()), nd::AdamState::for_parameters(b.t.params.size()),
          nd::AdamState::for_parameters(b.psi.params.size()), nd::AdamState::for_parameters(b.r_inv.params.size())};
}

LossGradients compute_gradients(const NetworkBundle& bundle, const nd::Tensor& x, const nd::Tensor& y,
                                const TrainConfig& config) {
  nd::Tape tape;
  const Graph gr = build_graph(tape, bundle, x, y, config);
  LossGradients out;
  out.losses = values(gr);
  const nd::Var descend[] = {gr.g, gr.t, gr.r_inv};
  auto grads = tape.gradient(gr.total, descend);
  const nd::Var critic[] = {gr.psi};
  auto psi_grad = tape.gradient(gr.psi_objective, critic);
  out.g = grads[0].storage();
  out.t = grads[1].storage();
  out.r_inv = grads[2].storage();
  out.psi = psi_grad[0].storage();
  return out;
}

LossBreakdown train_step(NetworkBundle& bundle, OptimizerState& opt, const nd::Tensor& x, const nd::Tensor& y,
                         const TrainConfig& config) {
  const LossGradients grads = compute_gradients(bundle, x, y, config);
  require_finite(grads.g, "G");
  require_finite(grads.t, "T");
  require_finite(grads.r_inv, "R_inv");
  require_finite(grads.psi, "psi");

  nd::adam_step(opt.g, bundle.g.params, grads.g, config.lr_g);
  nd::adam_step(opt.t, bundle.t.params, grads.t, config.lr_t);
  nd::adam_step(opt.psi, bundle.psi.params, grads.psi, config.lr_psi);
  nd::adam_step(opt.r_inv, bundle.r_inv.params, grads.r_inv, config.lr_rinv);
  return grads.losses;
}

BatchSampler::BatchSampler(std::size_t n, std::size_t m, Rng rng) : order_(n), m_(m), cursor_(n), rng_(rng) {
  if (m == 0 || m > n) throw ContractError("BatchSampler: batch size must be in [1, n]");
  std::iota(order_.begin(), order_.end(), 0);
}

std::span<const std::size_t> BatchSampler::next() {
  if (cursor_ + m_ > order_.size()) {
    std::shuffle(order_.begin(), order_.end(), rng_);
    cursor_ = 0;
    ++passes_;
  }
  const auto batch = std::span<const std::size_t>(order_).subspan(cursor_, m_);
  cursor_ += m_;
  return batch;
}

TrainResult train(const measures::EmpiricalMeasure& dataset, const TrainConfig& config, const Progress& progress) {
  config.validate();
  Rng init = Rng(config.seed).child("init");
  return train(dataset, config, init_bundle(config, dataset.dim(), init), progress);
}

TrainResult train(const measures::EmpiricalMeasure& dataset, const TrainConfig& config, NetworkBundle start,
                  const Progress& progress) {
  config.validate();
  start.validate();
  if (dataset.dim() != start.ambient_dim()) {
    throw DimensionError("train: dataset dim " + std::to_string(dataset.dim()) + " but the generator emits " +
                         std::to_string(start.ambient_dim()));
  }
  if (start.latent_dim() != config.latent_dim) throw DimensionError("train: bundle latent dim differs from config");
  const std::size_t n = dataset.size();
  if (n < config.batch) throw ContractError("train: dataset smaller than one batch");

  const Rng root(config.seed);
  Rng latent = root.child("latent");
  BatchSampler sampler(n, config.batch, root.child("shuffle"));

  TrainResult result{std::move(start), {}};
  TrainHistory& hist = result.history;
  auto& meta = hist.metadata;
  meta["seed"] = std::to_string(config.seed);
  meta["lambda1"] = csv::format_double(config.lambda1);
  meta["lambda2"] = csv::format_double(config.lambda2);
  meta["lambda3"] = csv::format_double(config.lambda3);
  meta["batch"] = std::to_string(config.batch);
  meta["iterations"] = std::to_string(config.iterations);
  std::string tags;
  for (const auto& a : config.ablations) tags += (tags.empty() ? "" : ",") + a;
  meta["ablations"] = tags;

  const bool checkpointing = !config.checkpoint_dir.empty();
  auto checkpoint = [&](std::size_t iter) {
    const auto path = config.checkpoint_dir / format_checkpoint_name(iter);
    nd::save_checkpoint(path, result.bundle.to_list());
    hist.checkpoints.push_back(path);
  };
  if (checkpointing) {
    std::filesystem::create_directories(config.checkpoint_dir);
    checkpoint(0);
  }

  OptimizerState opt = OptimizerState::for_bundle(result.bundle);
  std::size_t done = 0;
  const std::size_t m = config.batch;
  const std::size_t d = config.latent_dim;

  for (std::size_t it = 0; it < config.iterations; ++it) {
    const nd::Tensor x = dataset.points().gather_rows(sampler.next());
    nd::Tensor y(m, d);
    for (double& v : y.values()) v = latent.normal();

    LossBreakdown losses;
    try {
      losses = train_step(result.bundle, opt, x, y, config);
    } catch (const NumericError& e) {
      hist.aborted = true;
      hist.abort_reason = "iteration " + std::to_string(it) + ": " + e.what();
      break;
    }
    hist.losses.push_back(losses);
    done = it + 1;
    if (checkpointing && config.checkpoint_every > 0 && done % config.checkpoint_every == 0) checkpoint(done);
    if (progress && !progress(it, losses)) break;
  }
  if (checkpointing && hist.checkpoints.back().filename() != format_checkpoint_name(done)) {
    checkpoint(done);
  }
  meta["completed_iterations"] = std::to_string(done);
  meta["epochs_started"] = std::to_string(sampler.passes_started());
  meta["latent_draws"] = std::to_string(done * m * d);
  return result;
}

Generated generate_with_latent(const NetworkBundle& bundle, std::size_t n, Rng& rng) {
  bundle.validate();
  Generated out;
  if (n == 0) {
    out.latent = nd::Tensor(0, bundle.latent_dim());
    out.samples = measures::EmpiricalMeasure::uniform(nd::Tensor(0, bundle.ambient_dim()));
    return out;
  }
  out.latent = measures::sample_latent(bundle.latent_dim(), n, rng).points();
  out.samples = measures::EmpiricalMeasure::uniform(nd::mlp_forward(bundle.g, out.latent));
  return out;
}

measures::EmpiricalMeasure generate(const NetworkBundle& bundle, std::size_t n, Rng& rng) {
  return generate_with_latent(bundle, n, rng).samples;
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
  csv::write_row(out, {"iter", "ot", "gme", "disc", "gp", "recon", "total"});
  for (std::size_t i = 0; i < history.losses.size(); ++i) {
    const auto& l = history.losses[i];
    csv::write_row(out, {std::to_string(i), csv::format_double(l.ot), csv::format_double(l.gme),
                         csv::format_double(l.disc), csv::format_double(l.gp), csv::format_double(l.recon),
                         csv::format_double(l.total)});
  }
}

}  // namespace gmelab::gan
