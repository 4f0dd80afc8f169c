#include "gmelab/verify_io.hpp"

#include "gmelab/csv.hpp"

namespace gmelab::verify {

using nlohmann::json;

json to_json(const Quantiles& q) {
  return {{"min", q.min}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"max", q.max}};
}

json to_json(const BiLipReport& r) {
  return {{"pairs", r.pairs.size()}, {"excluded", r.excluded}, {"ratio", to_json(r.ratio)}, {"iqr", r.ratio.iqr()}};
}

json to_json(const KSetReport& r) {
  return {{"alpha", r.alpha},
          {"gamma", r.gamma},
          {"epsilon", r.epsilon},
          {"mass_in_k", r.mass_in_k},
          {"mass_in_b", r.mass_in_b},
          {"mass_in_q", r.mass_in_q},
          {"bound", r.bound},
          {"count_k", r.count_k},
          {"count_b", r.count_b},
          {"count_q", r.count_q},
          {"separation", r.separation},
          {"separated_pairs", r.separated_pairs},
          {"bilip_violations", r.bilip_violations},
          {"measure_bound_holds", r.measure_bound_holds},
          {"pass", r.pass}};
}

json to_json(const SandwichReport& r) {
  return {{"alpha", r.alpha},
          {"p", r.p},
          {"w_source", r.w_source},
          {"w_image", r.w_image},
          {"lower_slack", r.lower_slack},
          {"upper_slack", r.upper_slack},
          {"pass", r.pass}};
}

json to_json(const EqualityReport& r) {
  return {{"ot_ct", r.ot_ct}, {"w2_half_sq", r.w2_half_sq}, {"delta", r.delta}, {"pass", r.pass}};
}

json to_json(const PushforwardReport& r) {
  json g = json::array();
  for (std::size_t j = 0; j < r.g_star.rows(); ++j) {
    const auto row = r.g_star.row(j);
    g.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"g_star", g},
          {"r_star", r.r_star},
          {"multiset_error", r.multiset_error},
          {"cost_g_star", r.cost_g_star},
          {"ot_ct", r.ot_ct},
          {"cost_gap", r.cost_gap},
          {"pass", r.pass}};
}

json to_json(const ot::CcmReport& r) {
  const double fraction =
      r.cycles_tested ? static_cast<double>(r.cycles_passed) / static_cast<double>(r.cycles_tested) : 1.0;
  return {{"is_ccm", r.is_ccm},
          {"worst_violation", r.worst_violation},
          {"witness", r.witness},
          {"cycles_tested", r.cycles_tested},
          {"cycles_passed", r.cycles_passed},
          {"pass_fraction", fraction}};
}

json to_json(const ModeCounts& m) { return {{"counts", m.counts}, {"unassigned", m.unassigned}}; }

json to_json(const RelStdReport& r) {
  return {{"relative_std", r.value}, {"counts", r.modes.counts}, {"unassigned", r.modes.unassigned}};
}

json to_json(const ModulusProfile& p) {
  return {{"bin_edges", p.bin_edges}, {"bin_counts", p.bin_counts}, {"raw_max", p.raw_max}, {"omega", p.omega}};
}

void write_bilip_csv(std::ostream& out, const BiLipReport& r) {
  csv::write_row(out, {"distance", "ratio"});
  for (const auto& p : r.pairs) csv::write_row(out, {csv::format_double(p.distance), csv::format_double(p.ratio)});
}

void write_modulus_csv(std::ostream& out, const ModulusProfile& p) {
  csv::write_row(out, {"bin_lo", "bin_hi", "count", "raw_max", "omega"});
  for (std::size_t b = 0; b < p.raw_max.size(); ++b) {
    csv::write_row(out, {csv::format_double(p.bin_edges[b]), csv::format_double(p.bin_edges[b + 1]),
                         std::to_string(p.bin_counts[b]), csv::format_double(p.raw_max[b]),
                         csv::format_double(p.omega[b])});
  }
}

}  // namespace gmelab::verify
