#pragma once
// Fully-connected networks over a flat parameter vector.
//
// Parameter layout, layer by layer: weight block (in x out, row-major, so a
// layer computes h W + b on row-batched inputs) followed by the bias (out).
// The checkpoint format stores this vector verbatim.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gmelab/autodiff.hpp"
#include "gmelab/rng.hpp"
#include "gmelab/tensor.hpp"

namespace gmelab::nd {

enum class Activation : std::uint8_t { identity = 0, relu = 1, tanh = 2 };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct MlpSpec {
  std::vector<std::size_t> widths;     // input first, output last
  std::vector<Activation> hidden;      // one per hidden layer
  Activation final_activation = Activation::identity;

  // Same activation on every hidden layer.
  static MlpSpec uniform(std::vector<std::size_t> widths, Activation hidden,
                         Activation final_activation = Activation::identity);

  struct Layer {
    std::size_t in;
    std::size_t out;
    std::size_t weight_offset;
    std::size_t bias_offset;
    Activation activation;
  };

  void validate() const;
  std::size_t num_layers() const { return widths.size() - 1; }
  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }
  std::size_t parameter_count() const;
  std::vector<Layer> layers() const;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

// A spec with its parameters.
struct Mlp {
  MlpSpec spec;
  std::vector<double> params;

  void validate() const;
};

// Uniform fan-in scaling U(-sqrt(6/in), sqrt(6/in)) for weights, zero biases.
std::vector<double> init_params(const MlpSpec& spec, Rng& rng);

// Plain evaluation, no tape.
Tensor mlp_forward(const MlpSpec& spec, std::span<const double> params, const Tensor& input);
inline Tensor mlp_forward(const Mlp& net, const Tensor& input) {
  return mlp_forward(net.spec, net.params, input);
}

// Taped evaluation; `params` is a 1 x parameter_count Var.
Var mlp_forward(const MlpSpec& spec, Var params, Var input);

// Gradient of a scalar loss with respect to a flat parameter Var.
std::vector<double> backward_params(Tape& tape, Var loss, Var params);

// Row i holds grad_x psi(x_i) for a network with a single output.
Tensor input_gradient(const Mlp& net, const Tensor& x);

struct PenaltyGrad {
  double penalty = 0.0;             // mean_i || grad_x psi(x_i) ||^2
  std::vector<double> param_grad;   // d penalty / d params
};
PenaltyGrad grad_penalty_and_param_grad(const Mlp& net, const Tensor& x);

// Taped building block: mean_i || grad_x psi(x_i) ||^2 as a differentiable Var.
Var gradient_penalty(const MlpSpec& spec, Var params, const Tensor& x);

}  // namespace gmelab::nd
