#pragma once
// JSON and CSV forms of the verify reports.

#include <ostream>

#include "json.hpp"

#include "gmelab/otcore.hpp"
#include "gmelab/verify.hpp"

namespace gmelab::verify {

nlohmann::json to_json(const Quantiles& q);
nlohmann::json to_json(const BiLipReport& r);  // summary only; pairs go to CSV
nlohmann::json to_json(const KSetReport& r);
nlohmann::json to_json(const SandwichReport& r);
nlohmann::json to_json(const EqualityReport& r);
nlohmann::json to_json(const PushforwardReport& r);
nlohmann::json to_json(const ot::CcmReport& r);
nlohmann::json to_json(const ModeCounts& m);
nlohmann::json to_json(const RelStdReport& r);
nlohmann::json to_json(const ModulusProfile& p);

// `distance,ratio`
void write_bilip_csv(std::ostream& out, const BiLipReport& r);
// `bin_lo,bin_hi,count,raw_max,omega`
void write_modulus_csv(std::ostream& out, const ModulusProfile& p);

}  // namespace gmelab::verify
