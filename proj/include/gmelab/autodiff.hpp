#pragma once
// Reverse-mode automatic differentiation on a per-minibatch tape.
//
// A Tape owns every intermediate value of one computation.  Ops take and
// return Var handles into the tape.  Backward rules are themselves written
// in terms of Var ops, so `Tape::gradient_graph` can record the gradient as
// a new differentiable computation (double backward).  ReLU's derivative
// mask is recorded as a constant, which makes its second derivative zero
// almost everywhere.
//
// Fused ops whose backward is hand-written on raw tensors are marked
// first-order only; differentiating through them with gradient_graph throws
// ContractError.

#include <array>
#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "gmelab/tensor.hpp"

namespace gmelab::nd {

class Tape;

class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = std::numeric_limits<std::size_t>::max();
};

class Tape {
 public:
  // Parent gradients for up to two parents; `need[k]` tells the rule whether
  // parent k's gradient will be used.
  using Backward = std::function<std::array<Var, 2>(Var self, Var upstream, std::array<bool, 2> need)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // A value the loss is never differentiated against.
  Var constant(Tensor value);
  // A leaf that gradients may be requested for.
  Var variable(Tensor value);

  const Tensor& value(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  // d loss / d wrt[i] as plain tensors.  `loss` must be 1 x 1.
  std::vector<Tensor> gradient(Var loss, std::span<const Var> wrt);
  // The same derivatives recorded on this tape, so they can be differentiated again.
  std::vector<Var> gradient_graph(Var loss, std::span<const Var> wrt);

  // Appends an op result.  Used by the op implementations.
  Var record(std::string_view op, Tensor value, std::initializer_list<Var> parents, Backward backward,
             bool twice_differentiable = true);

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  struct Node {
    Tensor value;
    std::array<std::size_t, 2> parents{kNone, kNone};
    Backward backward;
    bool twice_differentiable = true;
  };

  std::vector<Var> run_backward(Var loss, std::span<const Var> wrt, bool create_graph);
  Var accumulate(Var acc, Var add);

  std::deque<Node> nodes_;
  bool recording_ = true;
};

// ---- ops -----------------------------------------------------------------

Var matmul(Var a, Var b, bool transpose_a = false, bool transpose_b = false);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
// Elementwise product with a constant tensor (gradient flows to `a` only).
Var mul(Var a, const Tensor& constant);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var reciprocal(Var a);
Var log1p(Var a);
Var relu(Var a);
Var tanh_activation(Var a);

// a[n x m] + row[1 x m] broadcast down the rows.
Var add_row(Var a, Var row);
Var broadcast_rows(Var row, std::size_t n);
Var broadcast_cols(Var col, std::size_t m);
Var fill(Var scalar, std::size_t rows, std::size_t cols);
Var sum(Var a);
Var mean(Var a);
// n x m -> n x 1
Var row_sum(Var a);
Var sum_rows(Var a);  // n x m -> 1 x m
Var transpose(Var a);

// rows x cols view of a 1 x total flat vector starting at `offset`.
Var slice(Var flat, std::size_t offset, std::size_t rows, std::size_t cols);
// Inverse of slice: places `block` into a 1 x total zero vector at `offset`.
Var embed(Var block, std::size_t offset, std::size_t total);

// m x m squared distances between rows of a.  First-order only.
Var pairwise_sqdist(Var a);

}  // namespace gmelab::nd
