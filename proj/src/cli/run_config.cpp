#include "gmelab/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gmelab/csv.hpp"
#include "gmelab/errors.hpp"

namespace gmelab::cli {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw FormatError("config: bad value '" + raw + "' for " + key);
  }
  return v;
}

std::vector<std::size_t> parse_widths(const std::string& key, const std::string& raw) {
  std::vector<std::size_t> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number<std::size_t>(key, item));
  }
  return out;
}

std::string join_widths(const std::vector<std::size_t>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s;
}

ot::Cost parse_cost(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "log") return ot::Cost::log_quadratic();
  if (s == "quadratic") return ot::Cost::quadratic(2.0);
  throw FormatError("config: " + key + " must be 'log' or 'quadratic', got '" + raw + "'");
}

std::string cost_name(const ot::Cost& c) { return c.kind == ot::CostKind::log_quadratic ? "log" : "quadratic"; }

nd::Activation parse_act(const std::string& key, const std::string& raw) {
  try {
    return nd::parse_activation(trim(raw));
  } catch (const std::exception&) {
    throw FormatError("config: bad activation '" + raw + "' for " + key);
  }
}

// One setter per accepted key, so unknown keys can be reported.
using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

std::map<std::string, Setter> setters() {
  std::map<std::string, Setter> s;
  auto size_key = [&](const std::string& name, std::function<std::size_t&(RunConfig&)> f) {
    s[name] = [f](RunConfig& c, const std::string& k, const std::string& v) { f(c) = parse_number<std::size_t>(k, v); };
  };
  auto double_key = [&](const std::string& name, std::function<double&(RunConfig&)> f) {
    s[name] = [f](RunConfig& c, const std::string& k, const std::string& v) { f(c) = parse_number<double>(k, v); };
  };

  s["run.seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
    c.seed = parse_number<std::uint64_t>(k, v);
  };
  s["run.out"] = [](RunConfig& c, const std::string&, const std::string& v) { c.out = trim(v); };

  s["dataset.scenario"] = [](RunConfig& c, const std::string&, const std::string& v) { c.dataset.scenario = trim(v); };
  size_key("dataset.ambient_dim", [](RunConfig& c) -> std::size_t& { return c.dataset.ambient_dim; });
  size_key("dataset.n", [](RunConfig& c) -> std::size_t& { return c.dataset.n; });
  double_key("dataset.var_leading", [](RunConfig& c) -> double& { return c.dataset.var_leading; });
  double_key("dataset.var_trailing", [](RunConfig& c) -> double& { return c.dataset.var_trailing; });
  s["dataset.path"] = [](RunConfig& c, const std::string&, const std::string& v) { c.dataset.path = trim(v); };

  double_key("train.lambda1", [](RunConfig& c) -> double& { return c.train.lambda1; });
  double_key("train.lambda2", [](RunConfig& c) -> double& { return c.train.lambda2; });
  double_key("train.lambda3", [](RunConfig& c) -> double& { return c.train.lambda3; });
  double_key("train.lr_g", [](RunConfig& c) -> double& { return c.train.lr_g; });
  double_key("train.lr_t", [](RunConfig& c) -> double& { return c.train.lr_t; });
  double_key("train.lr_psi", [](RunConfig& c) -> double& { return c.train.lr_psi; });
  double_key("train.lr_rinv", [](RunConfig& c) -> double& { return c.train.lr_rinv; });
  size_key("train.batch", [](RunConfig& c) -> std::size_t& { return c.train.batch; });
  size_key("train.iterations", [](RunConfig& c) -> std::size_t& { return c.train.iterations; });
  size_key("train.latent_dim", [](RunConfig& c) -> std::size_t& { return c.train.latent_dim; });
  size_key("train.checkpoint_every", [](RunConfig& c) -> std::size_t& { return c.train.checkpoint_every; });
  s["train.cost_x"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.train.cost_x = parse_cost(k, v); };
  s["train.cost_y"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.train.cost_y = parse_cost(k, v); };
  const std::pair<const char*, gan::Architecture gan::TrainConfig::*> nets[] = {
      {"g", &gan::TrainConfig::g_arch},
      {"t", &gan::TrainConfig::t_arch},
      {"psi", &gan::TrainConfig::psi_arch},
      {"r_inv", &gan::TrainConfig::r_inv_arch}};
  for (auto [name, arch] : nets) {
    const std::string p = std::string("train.") + name;
    s[p + "_hidden"] = [arch](RunConfig& c, const std::string& k, const std::string& v) {
      (c.train.*arch).hidden = parse_widths(k, v);
    };
    s[p + "_activation"] = [arch](RunConfig& c, const std::string& k, const std::string& v) {
      (c.train.*arch).activation = parse_act(k, v);
    };
    s[p + "_final"] = [arch](RunConfig& c, const std::string& k, const std::string& v) {
      (c.train.*arch).final_activation = parse_act(k, v);
    };
  }
  s["train.ablate"] = [](RunConfig& c, const std::string&, const std::string& v) {
    std::stringstream ss(v);
    std::string tag;
    while (std::getline(ss, tag, ',')) {
      if (!trim(tag).empty()) apply_ablation(c, trim(tag));
    }
  };

  size_key("eval.samples", [](RunConfig& c) -> std::size_t& { return c.eval.samples; });
  double_key("eval.radius_multiplier", [](RunConfig& c) -> double& { return c.eval.radius_multiplier; });
  size_key("eval.bilip_pairs", [](RunConfig& c) -> std::size_t& { return c.eval.bilip_pairs; });
  size_key("eval.monotone_probes", [](RunConfig& c) -> std::size_t& { return c.eval.monotone_probes; });
  size_key("eval.ccm_probes", [](RunConfig& c) -> std::size_t& { return c.eval.ccm_probes; });
  size_key("eval.ccm_cycles", [](RunConfig& c) -> std::size_t& { return c.eval.ccm_cycles; });
  size_key("eval.ccm_cycle_len", [](RunConfig& c) -> std::size_t& { return c.eval.ccm_cycle_len; });
  size_key("eval.modulus_pairs", [](RunConfig& c) -> std::size_t& { return c.eval.modulus_pairs; });
  size_key("eval.modulus_bins", [](RunConfig& c) -> std::size_t& { return c.eval.modulus_bins; });
  return s;
}

}  // namespace

void RunConfig::validate() const {
  if (dataset.scenario != "nine" && dataset.scenario != "twelve") {
    throw ContractError("config: dataset.scenario must be 'nine' or 'twelve'");
  }
  if (dataset.ambient_dim < 2) throw ContractError("config: dataset.ambient_dim must be >= 2");
  if (dataset.path.empty() && dataset.n < train.batch) throw ContractError("config: dataset.n smaller than train.batch");
  if (train.seed != seed) throw ContractError("config: train seed out of sync with run seed");
  train.validate();
  if (eval.samples == 0 || eval.bilip_pairs == 0 || eval.modulus_pairs == 0 || eval.modulus_bins == 0) {
    throw ContractError("config: eval counts must be >= 1");
  }
  if (!(eval.radius_multiplier > 0.0)) throw ContractError("config: eval.radius_multiplier must be > 0");
  if (eval.monotone_probes < 2) throw ContractError("config: eval.monotone_probes must be >= 2");
  if (eval.ccm_cycle_len < 2 || eval.ccm_cycle_len > 5) throw ContractError("config: eval.ccm_cycle_len must be in [2, 5]");
  if (eval.ccm_probes < eval.ccm_cycle_len) throw ContractError("config: eval.ccm_probes below the cycle length");
}

RunConfig parse_run_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  const auto table = setters();
  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw FormatError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = table.find(full);
      if (it == table.end()) throw FormatError("config: unknown key " + full);
      it->second(c, full, value.data());
    }
  }
  // Tags win over explicit lambdas regardless of key order.
  const auto tags = c.train.ablations;
  for (const auto& tag : tags) apply_ablation(c, tag);
  c.train.seed = c.seed;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("config: cannot open " + path.string());
  return parse_run_config(in);
}

void write_run_config(std::ostream& out, const RunConfig& c) {
  auto d = [](double v) { return csv::format_double(v); };
  auto z = [](std::size_t v) { return std::to_string(v); };
  out << "[run]\n"
      << "seed = " << c.seed << "\n"
      << "out = " << c.out.string() << "\n\n";
  out << "[dataset]\n"
      << "scenario = " << c.dataset.scenario << "\n"
      << "ambient_dim = " << z(c.dataset.ambient_dim) << "\n"
      << "n = " << z(c.dataset.n) << "\n"
      << "var_leading = " << d(c.dataset.var_leading) << "\n"
      << "var_trailing = " << d(c.dataset.var_trailing) << "\n";
  if (!c.dataset.path.empty()) out << "path = " << c.dataset.path.string() << "\n";
  const auto& t = c.train;
  out << "\n[train]\n"
      << "lambda1 = " << d(t.lambda1) << "\n"
      << "lambda2 = " << d(t.lambda2) << "\n"
      << "lambda3 = " << d(t.lambda3) << "\n"
      << "lr_g = " << d(t.lr_g) << "\n"
      << "lr_t = " << d(t.lr_t) << "\n"
      << "lr_psi = " << d(t.lr_psi) << "\n"
      << "lr_rinv = " << d(t.lr_rinv) << "\n"
      << "batch = " << z(t.batch) << "\n"
      << "iterations = " << z(t.iterations) << "\n"
      << "latent_dim = " << z(t.latent_dim) << "\n"
      << "checkpoint_every = " << z(t.checkpoint_every) << "\n"
      << "cost_x = " << cost_name(t.cost_x) << "\n"
      << "cost_y = " << cost_name(t.cost_y) << "\n";
  const std::pair<const char*, const gan::Architecture*> nets[] = {
      {"g", &t.g_arch}, {"t", &t.t_arch}, {"psi", &t.psi_arch}, {"r_inv", &t.r_inv_arch}};
  for (auto [name, arch] : nets) {
    out << name << "_hidden = " << join_widths(arch->hidden) << "\n"
        << name << "_activation = " << nd::to_string(arch->activation) << "\n"
        << name << "_final = " << nd::to_string(arch->final_activation) << "\n";
  }
  // Ablation tags only; the zeroed lambdas above already carry the effect.
  std::string tags;
  for (const auto& a : t.ablations) tags += (tags.empty() ? "" : ",") + a;
  if (!tags.empty()) out << "ablate = " << tags << "\n";
  const auto& e = c.eval;
  out << "\n[eval]\n"
      << "samples = " << z(e.samples) << "\n"
      << "radius_multiplier = " << d(e.radius_multiplier) << "\n"
      << "bilip_pairs = " << z(e.bilip_pairs) << "\n"
      << "monotone_probes = " << z(e.monotone_probes) << "\n"
      << "ccm_probes = " << z(e.ccm_probes) << "\n"
      << "ccm_cycles = " << z(e.ccm_cycles) << "\n"
      << "ccm_cycle_len = " << z(e.ccm_cycle_len) << "\n"
      << "modulus_pairs = " << z(e.modulus_pairs) << "\n"
      << "modulus_bins = " << z(e.modulus_bins) << "\n";
}

void apply_ablation(RunConfig& config, const std::string& tag) {
  auto& t = config.train;
  if (tag == "gme") {
    t.lambda1 = 0.0;
  } else if (tag == "gp") {
    t.lambda2 = 0.0;
  } else if (tag == "recon") {
    t.lambda3 = 0.0;
  } else {
    throw FormatError("unknown ablation '" + tag + "' (expected gme, gp or recon)");
  }
  if (std::find(t.ablations.begin(), t.ablations.end(), tag) == t.ablations.end()) t.ablations.push_back(tag);
}

void resolve_seed(RunConfig& config, std::optional<std::uint64_t> flag) {
  if (flag) {
    config.seed = *flag;
  } else if (const char* env = std::getenv("GMEGAN_SEED"); env != nullptr && *env != '\0') {
    config.seed = parse_number<std::uint64_t>("GMEGAN_SEED", env);
  }
  config.train.seed = config.seed;
}

measures::GaussianMixtureSpec mixture_spec(const DatasetSection& dataset) {
  auto spec = dataset.scenario == "twelve" ? measures::GaussianMixtureSpec::twelve_modes(dataset.ambient_dim)
                                           : measures::GaussianMixtureSpec::nine_modes(dataset.ambient_dim);
  spec.var_leading = dataset.var_leading;
  spec.var_trailing = dataset.var_trailing;
  spec.validate();
  return spec;
}

}  // namespace gmelab::cli
