#include "gmelab/autodiff.hpp"

#include <cmath>
#include <string>

#include "gmelab/errors.hpp"

namespace gmelab::nd {

const Tensor& Var::value() const {
  if (tape_ == nullptr) throw ContractError("autodiff: use of an empty Var");
  return tape_->value(*this);
}

Var Tape::constant(Tensor value) { return record("constant", std::move(value), {}, nullptr); }

Var Tape::variable(Tensor value) { return record("variable", std::move(value), {}, nullptr); }

const Tensor& Tape::value(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) {
    throw ContractError("autodiff: Var does not belong to this tape");
  }
  return nodes_[v.id_].value;
}

Var Tape::record(std::string_view op, Tensor value, std::initializer_list<Var> parents,
                 Backward backward, bool twice_differentiable) {
  value.require_finite(op);
  Node node;
  node.value = std::move(value);
  node.twice_differentiable = twice_differentiable;
  if (recording_ && parents.size() > 0) {
    std::size_t k = 0;
    for (const Var& p : parents) {
      if (p.tape_ != this) throw ContractError("autodiff: mixing Vars from different tapes");
      node.parents[k++] = p.id_;
    }
    node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::accumulate(Var acc, Var add_value) { return acc.valid() ? add(acc, add_value) : add_value; }

std::vector<Var> Tape::run_backward(Var loss, std::span<const Var> wrt, bool create_graph) {
  if (loss.tape_ != this) throw ContractError("autodiff: loss does not belong to this tape");
  const Tensor& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("autodiff: gradient of a non-scalar (" + std::to_string(lv.rows()) + "x" +
                        std::to_string(lv.cols()) + ") loss");
  }
  const std::size_t n = loss.id_ + 1;

  // Nodes that depend on at least one requested leaf.
  std::vector<char> reach(n, 0);
  for (const Var& w : wrt) {
    if (w.tape_ != this) throw ContractError("autodiff: wrt Var does not belong to this tape");
    if (w.id_ < n) reach[w.id_] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p : nodes_[i].parents) {
      if (p != kNone && reach[p]) reach[i] = 1;
    }
  }

  struct RecordingGuard {
    bool& flag;
    bool saved;
    ~RecordingGuard() { flag = saved; }
  } guard{recording_, recording_};
  recording_ = create_graph;

  std::vector<Var> grads(n);
  grads[loss.id_] = constant(Tensor::scalar(1.0));
  for (std::size_t i = n; i-- > 0;) {
    if (!grads[i].valid() || !reach[i]) continue;
    // Leaves and first-order-only nodes recorded under create_graph have no rule.
    const Node& node = nodes_[i];
    if (!node.backward) continue;
    const std::array<bool, 2> need{node.parents[0] != kNone && reach[node.parents[0]],
                                   node.parents[1] != kNone && reach[node.parents[1]]};
    if (!need[0] && !need[1]) continue;
    if (create_graph && !node.twice_differentiable) {
      throw ContractError("autodiff: op at node " + std::to_string(i) +
                          " does not support second-order differentiation");
    }
    const std::array<Var, 2> pg = node.backward(Var(this, i), grads[i], need);
    for (std::size_t k = 0; k < 2; ++k) {
      if (!need[k]) continue;
      const std::size_t p = node.parents[k];
      grads[p] = accumulate(grads[p], pg[k]);
    }
  }

  std::vector<Var> out;
  out.reserve(wrt.size());
  for (const Var& w : wrt) {
    if (w.id_ < n && grads[w.id_].valid()) {
      out.push_back(grads[w.id_]);
    } else {
      const Tensor& wv = value(w);
      out.push_back(constant(Tensor(wv.rows(), wv.cols())));
    }
  }
  return out;
}

std::vector<Tensor> Tape::gradient(Var loss, std::span<const Var> wrt) {
  const std::size_t mark = nodes_.size();
  std::vector<Var> vars = run_backward(loss, wrt, false);
  std::vector<Tensor> out;
  out.reserve(vars.size());
  for (const Var& v : vars) out.push_back(value(v));
  // First-order scratch nodes are never referenced again.
  nodes_.resize(mark);
  return out;
}

std::vector<Var> Tape::gradient_graph(Var loss, std::span<const Var> wrt) {
  return run_backward(loss, wrt, true);
}

// ---- elementwise helpers --------------------------------------------------

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + " differ");
  }
}

template <class F>
Tensor map(const Tensor& a, F f) {
  Tensor out(a.rows(), a.cols());
  const double* src = a.data();
  double* dst = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) dst[i] = f(src[i]);
  return out;
}

template <class F>
Tensor zip(const Tensor& a, const Tensor& b, F f) {
  Tensor out(a.rows(), a.cols());
  const double* x = a.data();
  const double* y = b.data();
  double* dst = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) dst[i] = f(x[i], y[i]);
  return out;
}

}  // namespace

// ---- ops ------------------------------------------------------------------

Var matmul(Var a, Var b, bool ta, bool tb) {
  Tape& t = a.tape();
  Tensor c = matmul(a.value(), b.value(), ta, tb);
  return t.record("matmul", std::move(c), {a, b},
                  [a, b, ta, tb](Var, Var u, std::array<bool, 2> need) -> std::array<Var, 2> {
                    Var da, db;
                    if (!ta && !tb) {
                      if (need[0]) da = matmul(u, b, false, true);
                      if (need[1]) db = matmul(a, u, true, false);
                    } else if (!ta && tb) {
                      if (need[0]) da = matmul(u, b, false, false);
                      if (need[1]) db = matmul(u, a, true, false);
                    } else if (ta && !tb) {
                      if (need[0]) da = matmul(b, u, false, true);
                      if (need[1]) db = matmul(a, u, false, false);
                    } else {
                      if (need[0]) da = matmul(b, u, true, true);
                      if (need[1]) db = matmul(u, a, true, true);
                    }
                    return {da, db};
                  });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor v = zip(a.value(), b.value(), [](double x, double y) { return x + y; });
  return a.tape().record("add", std::move(v), {a, b},
                         [](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> { return {u, u}; });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor v = zip(a.value(), b.value(), [](double x, double y) { return x - y; });
  return a.tape().record("sub", std::move(v), {a, b},
                         [](Var, Var u, std::array<bool, 2> need) -> std::array<Var, 2> {
                           return {u, need[1] ? scale(u, -1.0) : Var{}};
                         });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor v = zip(a.value(), b.value(), [](double x, double y) { return x * y; });
  return a.tape().record("mul", std::move(v), {a, b},
                         [a, b](Var, Var u, std::array<bool, 2> need) -> std::array<Var, 2> {
                           return {need[0] ? mul(u, b) : Var{}, need[1] ? mul(u, a) : Var{}};
                         });
}

Var mul(Var a, const Tensor& c) {
  require_same_shape(a.value(), c, "mul");
  Tensor v = zip(a.value(), c, [](double x, double y) { return x * y; });
  return a.tape().record("mul_const", std::move(v), {a},
                         [c](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
                           return {mul(u, c), Var{}};
                         });
}

Var scale(Var a, double s) {
  Tensor v = map(a.value(), [s](double x) { return s * x; });
  return a.tape().record("scale", std::move(v), {a},
                         [s](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
                           return {scale(u, s), Var{}};
                         });
}

Var add_scalar(Var a, double s) {
  Tensor v = map(a.value(), [s](double x) { return x + s; });
  return a.tape().record("add_scalar", std::move(v), {a},
                         [](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> { return {u, Var{}}; });
}

Var reciprocal(Var a) {
  Tensor v = map(a.value(), [](double x) { return 1.0 / x; });
  return a.tape().record("reciprocal", std::move(v), {a},
                         [](Var self, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
                           return {scale(mul(u, mul(self, self)), -1.0), Var{}};
                         });
}

Var log1p(Var a) {
  Tensor v = map(a.value(), [](double x) { return std::log1p(x); });
  return a.tape().record("log1p", std::move(v), {a},
                         [a](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
                           return {mul(u, reciprocal(add_scalar(a, 1.0))), Var{}};
                         });
}

Var relu(Var a) {
  Tensor mask = map(a.value(), [](double x) { return x > 0.0 ? 1.0 : 0.0; });
  Tensor v = map(a.value(), [](double x) { return x > 0.0 ? x : 0.0; });
  return a.tape().record("relu", std::move(v), {a},
                         [mask = std::move(mask)](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
                           return {mul(u, mask), Var{}};
                         });
}

Var tanh_activation(Var a) {
  Tensor v = map(a.value(), [](double x) { return std::tanh(x); });
  return a.tape().record("tanh", std::move(v), {a},
                         [](Var self, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
                           return {mul(u, add_scalar(scale(mul(self, self), -1.0), 1.0)), Var{}};
                         });
}

Var add_row(Var a, Var row) {
  const Tensor& av = a.value();
  const Tensor& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != av.cols()) throw DimensionError("add_row: row width mismatch");
  Tensor v = av;
  for (std::size_t i = 0; i < v.rows(); ++i) {
    auto r = v.row(i);
    for (std::size_t j = 0; j < v.cols(); ++j) r[j] += rv(0, j);
  }
  return a.tape().record("add_row", std::move(v), {a, row},
                         [](Var, Var u, std::array<bool, 2> need) -> std::array<Var, 2> {
                           return {u, need[1] ? sum_rows(u) : Var{}};
                         });
}

Var broadcast_rows(Var row, std::size_t n) {
  const Tensor& rv = row.value();
  if (rv.rows() != 1) throw DimensionError("broadcast_rows: expected a 1 x m row");
  Tensor v(n, rv.cols());
  for (std::size_t i = 0; i < n; ++i) std::copy(rv.data(), rv.data() + rv.cols(), v.row(i).begin());
  return row.tape().record("broadcast_rows", std::move(v), {row},
                           [](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
                             return {sum_rows(u), Var{}};
                           });
}

Var broadcast_cols(Var col, std::size_t m) {
  const Tensor& cv = col.value();
  if (cv.cols() != 1) throw DimensionError("broadcast_cols: expected an n x 1 column");
  Tensor v(cv.rows(), m);
  for (std::size_t i = 0; i < cv.rows(); ++i) {
    for (std::size_t j = 0; j < m; ++j) v(i, j) = cv(i, 0);
  }
  return col.tape().record("broadcast_cols", std::move(v), {col},
                           [](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
                             return {row_sum(u), Var{}};
                           });
}

Var fill(Var scalar, std::size_t rows, std::size_t cols) {
  Tensor v(rows, cols, scalar.value().item());
  return scalar.tape().record("fill", std::move(v), {scalar},
                              [](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
                                return {sum(u), Var{}};
                              });
}

Var sum(Var a) {
  const Tensor& av = a.value();
  double s = 0.0;
  for (double x : av.values()) s += x;
  const std::size_t r = av.rows();
  const std::size_t c = av.cols();
  return a.tape().record("sum", Tensor::scalar(s), {a},
                         [r, c](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
                           return {fill(u, r, c), Var{}};
                         });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw DimensionError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var row_sum(Var a) {
  const Tensor& av = a.value();
  Tensor v(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) {
    double s = 0.0;
    for (double x : av.row(i)) s += x;
    v(i, 0) = s;
  }
  const std::size_t m = av.cols();
  return a.tape().record("row_sum", std::move(v), {a},
                         [m](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
                           return {broadcast_cols(u, m), Var{}};
                         });
}

Var sum_rows(Var a) {
  const Tensor& av = a.value();
  Tensor v(1, av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    const auto r = av.row(i);
    for (std::size_t j = 0; j < av.cols(); ++j) v(0, j) += r[j];
  }
  const std::size_t n = av.rows();
  return a.tape().record("sum_rows", std::move(v), {a},
                         [n](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
                           return {broadcast_rows(u, n), Var{}};
                         });
}

Var transpose(Var a) {
  return a.tape().record("transpose", a.value().transposed(), {a},
                         [](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
                           return {transpose(u), Var{}};
                         });
}

Var slice(Var flat, std::size_t offset, std::size_t rows, std::size_t cols) {
  const Tensor& fv = flat.value();
  if (fv.rows() != 1 || offset + rows * cols > fv.cols()) {
    throw DimensionError("slice: block does not fit in the flat vector");
  }
  Tensor v(rows, cols,
           std::vector<double>(fv.data() + offset, fv.data() + offset + rows * cols));
  const std::size_t total = fv.cols();
  return flat.tape().record("slice", std::move(v), {flat},
                            [offset, total](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
                              return {embed(u, offset, total), Var{}};
                            });
}

Var embed(Var block, std::size_t offset, std::size_t total) {
  const Tensor& bv = block.value();
  if (offset + bv.size() > total) throw DimensionError("embed: block does not fit");
  Tensor v(1, total);
  std::copy(bv.data(), bv.data() + bv.size(), v.data() + offset);
  const std::size_t r = bv.rows();
  const std::size_t c = bv.cols();
  return block.tape().record("embed", std::move(v), {block},
                             [offset, r, c](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
                               return {slice(u, offset, r, c), Var{}};
                             });
}

Var pairwise_sqdist(Var a) {
  Tensor v = pairwise_sqdist(a.value(), a.value());
  return a.tape().record(
      "pairwise_sqdist", std::move(v), {a},
      [a](Var, Var u, std::array<bool, 2>) -> std::array<Var, 2> {
        // d/dA_i = 2 * sum_j (U_ij + U_ji) (A_i - A_j)
        const Tensor& av = a.value();
        const Tensor& uv = u.value();
        const std::size_t m = av.rows();
        Tensor w(m, m);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < m; ++j) w(i, j) = uv(i, j) + uv(j, i);
        }
        Tensor wa = matmul(w, av);
        Tensor g(m, av.cols());
        for (std::size_t i = 0; i < m; ++i) {
          double s = 0.0;
          for (double x : w.row(i)) s += x;
          for (std::size_t k = 0; k < av.cols(); ++k) g(i, k) = 2.0 * (s * av(i, k) - wa(i, k));
        }
        return {a.tape().constant(std::move(g)), Var{}};
      },
      /*twice_differentiable=*/false);
}

}  // namespace gmelab::nd
