#include "gmelab/mlp.hpp"

#include <cmath>
#include <string>

#include "gmelab/errors.hpp"
#include "gmelab/kernels.hpp"

namespace gmelab::nd {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw FormatError("unknown activation '" + std::string(name) + "'");
}

MlpSpec MlpSpec::uniform(std::vector<std::size_t> widths, Activation hidden_act,
                         Activation final_activation) {
  MlpSpec s;
  const std::size_t hidden_layers = widths.size() >= 2 ? widths.size() - 2 : 0;
  s.widths = std::move(widths);
  s.hidden.assign(hidden_layers, hidden_act);
  s.final_activation = final_activation;
  s.validate();
  return s;
}

void MlpSpec::validate() const {
  if (widths.size() < 2) throw ContractError("mlp: need at least an input and an output width");
  for (std::size_t w : widths) {
    if (w == 0) throw ContractError("mlp: zero layer width");
  }
  if (hidden.size() != widths.size() - 2) {
    throw ContractError("mlp: expected " + std::to_string(widths.size() - 2) +
                        " hidden activations, got " + std::to_string(hidden.size()));
  }
  if (final_activation == Activation::relu) {
    throw ContractError("mlp: final activation must be identity or tanh");
  }
}

std::size_t MlpSpec::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) n += widths[l] * widths[l + 1] + widths[l + 1];
  return n;
}

std::vector<MlpSpec::Layer> MlpSpec::layers() const {
  std::vector<Layer> out;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Layer layer;
    layer.in = widths[l];
    layer.out = widths[l + 1];
    layer.weight_offset = offset;
    layer.bias_offset = offset + layer.in * layer.out;
    layer.activation = l + 2 < widths.size() ? hidden[l] : final_activation;
    offset = layer.bias_offset + layer.out;
    out.push_back(layer);
  }
  return out;
}

void Mlp::validate() const {
  spec.validate();
  if (params.size() != spec.parameter_count()) {
    throw DimensionError("mlp: " + std::to_string(params.size()) + " parameters for a spec needing " +
                         std::to_string(spec.parameter_count()));
  }
}

std::vector<double> init_params(const MlpSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<double> p(spec.parameter_count(), 0.0);
  for (const auto& layer : spec.layers()) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.in));
    for (std::size_t i = 0; i < layer.in * layer.out; ++i) {
      p[layer.weight_offset + i] = rng.uniform(-bound, bound);
    }
  }
  return p;
}

namespace {

void check_input(const MlpSpec& spec, std::size_t params, const Tensor& input) {
  spec.validate();
  if (params != spec.parameter_count()) {
    throw DimensionError("mlp_forward: " + std::to_string(params) + " parameters, spec needs " +
                         std::to_string(spec.parameter_count()));
  }
  if (input.cols() != spec.input_width()) {
    throw DimensionError("mlp_forward: input width " + std::to_string(input.cols()) +
                         ", spec expects " + std::to_string(spec.input_width()));
  }
}

void apply_activation(Activation a, Tensor& t) {
  switch (a) {
    case Activation::identity: return;
    case Activation::relu:
      for (double& v : t.values()) v = v > 0.0 ? v : 0.0;
      return;
    case Activation::tanh:
      for (double& v : t.values()) v = std::tanh(v);
      return;
  }
}

}  // namespace

Tensor mlp_forward(const MlpSpec& spec, std::span<const double> params, const Tensor& input) {
  check_input(spec, params.size(), input);
  const auto& k = kernels::active();
  Tensor h = input;
  for (const auto& layer : spec.layers()) {
    Tensor next(h.rows(), layer.out);
    if (h.rows() > 0) {
      k.gemm(kernels::Transpose::no, kernels::Transpose::no, h.rows(), layer.out, layer.in, h.data(),
             h.cols(), params.data() + layer.weight_offset, layer.out, next.data(), next.cols());
    }
    const double* bias = params.data() + layer.bias_offset;
    for (std::size_t i = 0; i < next.rows(); ++i) {
      auto r = next.row(i);
      for (std::size_t j = 0; j < layer.out; ++j) r[j] += bias[j];
    }
    apply_activation(layer.activation, next);
    h = std::move(next);
  }
  h.require_finite("mlp_forward output");
  return h;
}

Var mlp_forward(const MlpSpec& spec, Var params, Var input) {
  const Tensor& pv = params.value();
  if (pv.rows() != 1) throw DimensionError("mlp_forward: parameters must be a 1 x n row");
  check_input(spec, pv.cols(), input.value());
  Var h = input;
  for (const auto& layer : spec.layers()) {
    Var w = slice(params, layer.weight_offset, layer.in, layer.out);
    Var b = slice(params, layer.bias_offset, 1, layer.out);
    h = add_row(matmul(h, w), b);
    switch (layer.activation) {
      case Activation::identity: break;
      case Activation::relu: h = relu(h); break;
      case Activation::tanh: h = tanh_activation(h); break;
    }
  }
  return h;
}

std::vector<double> backward_params(Tape& tape, Var loss, Var params) {
  const Var wrt[] = {params};
  return tape.gradient(loss, wrt).front().storage();
}

Tensor input_gradient(const Mlp& net, const Tensor& x) {
  net.validate();
  if (net.spec.output_width() != 1) throw ContractError("input_gradient: network output width must be 1");
  Tape tape;
  Var p = tape.constant(Tensor::row_vector(net.params));
  Var xv = tape.variable(x);
  Var out = sum(mlp_forward(net.spec, p, xv));
  const Var wrt[] = {xv};
  return tape.gradient(out, wrt).front();
}

Var gradient_penalty(const MlpSpec& spec, Var params, const Tensor& x) {
  if (spec.output_width() != 1) throw ContractError("gradient_penalty: network output width must be 1");
  if (x.rows() == 0) throw DimensionError("gradient_penalty: empty batch");
  Tape& tape = params.tape();
  Var xv = tape.variable(x);
  Var out = sum(mlp_forward(spec, params, xv));
  const Var wrt[] = {xv};
  Var g = tape.gradient_graph(out, wrt).front();
  return scale(sum(mul(g, g)), 1.0 / static_cast<double>(x.rows()));
}

PenaltyGrad grad_penalty_and_param_grad(const Mlp& net, const Tensor& x) {
  net.validate();
  Tape tape;
  Var p = tape.variable(Tensor::row_vector(net.params));
  Var penalty = gradient_penalty(net.spec, p, x);
  PenaltyGrad out;
  out.penalty = penalty.value().item();
  out.param_grad = backward_params(tape, penalty, p);
  return out;
}

}  // namespace gmelab::nd
