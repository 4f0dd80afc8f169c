#include "gmelab/oracle_suites.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include "gmelab/errors.hpp"
#include "gmelab/otcore.hpp"
#include "gmelab/verify.hpp"
#include "gmelab/verify_io.hpp"

namespace gmelab::cli {

using nlohmann::json;
using measures::EmpiricalMeasure;

namespace {

// Outcome of one instance: pass flag, summary, and the data needed to replay it.
struct Instance {
  bool pass = false;
  json summary;
  json data;
};

json tensor_json(const nd::Tensor& t) {
  json rows = json::array();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const auto row = t.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

nd::Tensor gaussian(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  nd::Tensor t(rows, cols);
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

nd::Tensor rotation(std::size_t dim, Rng& rng) {
  nd::Tensor q = gaussian(dim, dim, rng);
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      double dot = 0.0;
      for (std::size_t r = 0; r < dim; ++r) dot += q(r, c) * q(r, p);
      for (std::size_t r = 0; r < dim; ++r) q(r, c) -= dot * q(r, p);
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < dim; ++r) norm += q(r, c) * q(r, c);
    for (std::size_t r = 0; r < dim; ++r) q(r, c) /= std::sqrt(norm);
  }
  return q;
}

// Rotation with columns rescaled into [0.5, 2]; always invertible.
nd::Tensor invertible(std::size_t dim, Rng& rng) {
  nd::Tensor q = rotation(dim, rng);
  for (std::size_t c = 0; c < dim; ++c) {
    const double s = rng.uniform(0.5, 2.0);
    for (std::size_t r = 0; r < dim; ++r) q(r, c) *= s;
  }
  return q;
}

double enumerate_ot(const nd::Tensor& c) {
  std::vector<std::size_t> perm(c.rows());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += c(i, perm[i]);
    best = std::min(best, s / static_cast<double>(perm.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Instance ot_instance(Rng& rng) {
  const std::size_t n = 1 + rng.index(8);
  nd::Tensor cost(n, n);
  for (double& v : cost.values()) v = rng.uniform(0.0, 10.0);
  const double hungarian = ot::exact_ot_uniform(cost).cost;
  const double brute = enumerate_ot(cost);
  Instance out;
  out.pass = std::abs(hungarian - brute) <= 1e-12;
  out.summary = {{"n", n}, {"hungarian", hungarian}, {"enumeration", brute}};
  out.data = {{"cost", tensor_json(cost)}};
  return out;
}

Instance gme_instance(Rng& rng) {
  const std::size_t n = 2 + rng.index(11);
  const std::size_t dim = 1 + rng.index(4);
  const nd::Tensor x = gaussian(n, dim, rng);
  const nd::Tensor q = rotation(dim, rng);
  const auto mu = EmpiricalMeasure::uniform(x);
  const auto log_cost = ot::Cost::log_quadratic();
  const double identity = ot::gm_cost(ot::identity_map(), mu, log_cost, log_cost);
  const double orthogonal = ot::gm_cost(ot::linear_map(q), mu, log_cost, log_cost);

  // Two points at distance 1 under T = 2x: (log 5 - log 2)^2 per ordered off-diagonal pair.
  const nd::Mlp twice{nd::MlpSpec::uniform({2, 2}, nd::Activation::identity), {2.0, 0.0, 0.0, 2.0, 0.0, 0.0}};
  const double pair = ot::gme_minibatch_value(twice, nd::Tensor::from_rows({{0.0, 0.0}, {1.0, 0.0}}), log_cost, log_cost);
  const double l = std::log(2.5);

  Instance out;
  out.pass = identity <= 1e-12 && orthogonal <= 1e-12 && std::abs(pair - l * l) <= 1e-12;
  out.summary = {{"n", n}, {"dim", dim}, {"identity", identity}, {"orthogonal", orthogonal}, {"m2_pair", pair}};
  out.data = {{"points", tensor_json(x)}, {"rotation", tensor_json(q)}};
  return out;
}

Instance kset_instance(Rng& rng, std::size_t index) {
  // Alternate near-isometries of the plane and generic maps R^3 -> R^2.
  const bool near = index % 2 == 0;
  nd::Tensor m = near ? rotation(2, rng) : gaussian(3, 2, rng, 0.8);
  if (near) {
    for (double& v : m.values()) v += 0.05 * rng.normal();
  }
  const nd::Tensor x = gaussian(20, m.rows(), rng, 1.5);
  const auto report = verify::kset_check(ot::linear_map(m), EmpiricalMeasure::uniform(x), 0.8, 0.5);
  Instance out;
  out.pass = report.pass && std::abs(report.mass_in_k + report.mass_in_b + report.mass_in_q - 1.0) <= 1e-12;
  out.summary = verify::to_json(report);
  out.data = {{"points", tensor_json(x)}, {"map", tensor_json(m)}, {"alpha", 0.8}, {"gamma", 0.5}};
  return out;
}

Instance lemma41_instance(Rng& rng) {
  const std::size_t n = 2 + rng.index(15);
  const std::size_t dim = 1 + rng.index(3);
  const nd::Tensor x = gaussian(n, dim, rng);
  const nd::Tensor y = gaussian(n, dim, rng);
  const nd::Tensor m = invertible(dim, rng);
  const auto report =
      verify::lemma41_equality(ot::linear_map(m), EmpiricalMeasure::uniform(x), EmpiricalMeasure::uniform(y));
  Instance out;
  out.pass = report.pass && report.delta <= verify::kOracleTolerance;
  out.summary = verify::to_json(report);
  out.data = {{"mu", tensor_json(x)}, {"nu", tensor_json(y)}, {"map", tensor_json(m)}};
  return out;
}

Instance thm42_instance(Rng& rng) {
  const std::size_t n = 2 + rng.index(15);
  const std::size_t dim = 1 + rng.index(3);
  const nd::Tensor x = gaussian(n, dim, rng);
  const nd::Tensor y = gaussian(n, dim, rng);
  const nd::Tensor m = invertible(dim, rng);
  const auto report = verify::thm42_pushforward(m, EmpiricalMeasure::uniform(x), EmpiricalMeasure::uniform(y));
  Instance out;
  out.pass = report.pass && report.multiset_error <= verify::kOracleTolerance &&
             report.cost_gap <= verify::kOracleTolerance;
  out.summary = {{"multiset_error", report.multiset_error}, {"cost_gap", report.cost_gap}, {"pass", report.pass}};
  out.data = {{"mu", tensor_json(x)}, {"nu", tensor_json(y)}, {"map", tensor_json(m)}};
  return out;
}

Instance sandwich_instance(Rng& rng, std::size_t index) {
  const std::size_t n = 2 + rng.index(9);
  const nd::Tensor a = gaussian(n, 2, rng);
  const nd::Tensor b = gaussian(n, 2, rng);
  nd::Tensor m;
  switch (index % 3) {
    case 0:
      m = nd::Tensor::from_rows({{1.0, 0.0}, {0.0, 2.0}});
      break;
    case 1:
      m = rotation(2, rng);
      for (double& v : m.values()) v *= 3.0;
      break;
    default:
      m = invertible(2, rng);
  }
  const double p = 1.0 + static_cast<double>(rng.index(3));
  const auto report =
      verify::prop21_sandwich(ot::linear_map(m), EmpiricalMeasure::uniform(a), EmpiricalMeasure::uniform(b), p);
  Instance out;
  out.pass = report.pass;
  out.summary = verify::to_json(report);
  out.data = {{"a", tensor_json(a)}, {"b", tensor_json(b)}, {"map", tensor_json(m)}, {"p", p}};
  return out;
}

Instance ccm_instance(Rng& rng) {
  const std::size_t n = 2 + rng.index(7);
  const nd::Tensor x = gaussian(n, 2, rng);
  const nd::Tensor y = gaussian(n, 2, rng);
  const auto cost = ot::pairwise_cost(ot::Cost::quadratic(2.0), x, y);
  const auto plan = ot::exact_ot_uniform(cost);
  // Gamma = {(x_i, y_sigma(i))}: reorder columns so pair i sits on the diagonal.
  const auto ys = y.gather_rows(*plan.assignment);
  const auto report = ot::ccm_check(x, ys, ot::Cost::quadratic(2.0), std::min<std::size_t>(4, n));
  Instance out;
  out.pass = report.is_ccm;
  out.summary = verify::to_json(report);
  out.data = {{"x", tensor_json(x)}, {"y", tensor_json(y)}, {"assignment", *plan.assignment}};
  return out;
}

}  // namespace

json OracleOutcome::to_json() const {
  return {{"suite", suite},
          {"instances", instances},
          {"passed", passed},
          {"pass", pass()},
          {"results", results},
          {"failures", failures}};
}

const std::vector<std::string>& oracle_suites() {
  static const std::vector<std::string> names{"ot", "gme", "kset", "lemma41", "thm42", "ccm", "sandwich", "gk"};
  return names;
}

std::size_t default_count(const std::string& suite) {
  static const std::map<std::string, std::size_t> counts{{"ot", 100},      {"gme", 30}, {"kset", 50},
                                                         {"lemma41", 30},  {"thm42", 30}, {"ccm", 30},
                                                         {"sandwich", 30}, {"gk", 3}};
  const auto it = counts.find(suite);
  if (it == counts.end()) throw ContractError("unknown oracle suite '" + suite + "'");
  return it->second;
}

OracleOutcome run_oracle(const std::string& suite, const OracleOptions& options) {
  const std::size_t defaults = default_count(suite);
  OracleOutcome out;
  out.suite = suite;

  auto record = [&](std::size_t index, const Instance& inst) {
    ++out.instances;
    json summary = inst.summary;
    summary["instance"] = index;
    summary["pass"] = inst.pass;
    out.results.push_back(summary);
    if (inst.pass) {
      ++out.passed;
    } else {
      out.failures.push_back({{"instance", index},
                              {"replay", {{"suite", suite}, {"seed", options.seed}, {"stream", suite + "/" + std::to_string(index)}}},
                              {"data", inst.data},
                              {"summary", inst.summary}});
    }
  };

  if (suite == "gk") {
    std::vector<std::size_t> ks = options.k ? std::vector<std::size_t>{*options.k} : std::vector<std::size_t>{0, 2, 5};
    for (std::size_t i = 0; i < ks.size(); ++i) {
      Instance inst;
      const double ks_stat = verify::gk_pushforward_demo(ks[i], options.grid);
      inst.pass = ks_stat <= 0.02;
      inst.summary = {{"k", ks[i]}, {"n", options.grid}, {"ks", ks_stat}};
      inst.data = inst.summary;
      record(i, inst);
    }
    return out;
  }

  const std::size_t count = options.count ? options.count : defaults;
  const Rng root(options.seed);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = root.child(suite + "/" + std::to_string(i));
    Instance inst;
    try {
      if (suite == "ot") inst = ot_instance(rng);
      else if (suite == "gme") inst = gme_instance(rng);
      else if (suite == "kset") inst = kset_instance(rng, i);
      else if (suite == "lemma41") inst = lemma41_instance(rng);
      else if (suite == "thm42") inst = thm42_instance(rng);
      else if (suite == "sandwich") inst = sandwich_instance(rng, i);
      else inst = ccm_instance(rng);
    } catch (const std::exception& e) {
      inst.pass = false;
      inst.summary = {{"error", e.what()}};
    }
    record(i, inst);
  }
  return out;
}

}  // namespace gmelab::cli
