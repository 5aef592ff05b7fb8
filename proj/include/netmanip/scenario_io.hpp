#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "netmanip/altmin.hpp"
#include "netmanip/types.hpp"

namespace netmanip {

/// Loads and validates a scenario file (JSON).  Unknown keys are rejected.
/// The network may be an inline row-major matrix or a path to a header-free
/// CSV file, resolved relative to the scenario file.  Notices (e.g. a seed
/// defaulted to zero) are appended to `notices` when given.
Scenario parse_scenario(const std::string& path, std::vector<std::string>* notices = nullptr);

/// Same, from an already parsed JSON document; `base_dir` resolves relative
/// network paths.
Scenario parse_scenario_json(const nlohmann::json& doc, const std::string& base_dir,
                             std::vector<std::string>* notices = nullptr);

/// Inverse of parsing (the network is embedded inline); parse(serialize(s))
/// reproduces the scenario exactly.
nlohmann::json scenario_to_json(const Scenario& s);

/// Reference-optimum files: {"x_star": [[...]], "p_star": [[...]]} row-major.
ReferenceOptimum load_reference(const std::string& path);
nlohmann::json reference_to_json(const ReferenceOptimum& ref);

/// Trace emission.  CSV columns: iter, phi, dist_x, dist_p, bound_x,
/// bound_p, gap_p_realized, gap_x_realized; unavailable values print as nan.
void write_trace_csv(const RunTrace& trace, const std::string& path);
nlohmann::json trace_to_json(const RunTrace& trace);

/// Rows whose distance exceeds its bound curve (tolerance 1e-9); zero on a
/// run where the theorem applies and the certificates are honest.
int bound_violations(const RunTrace& trace);

/// Summary report for a completed run: final distances, realized rate, bound
/// violations, limit radii and wall-clock.  Bound fields are omitted when
/// the stability assumption fails.
nlohmann::json make_report(const RunTrace& trace, double wall_seconds);

}  // namespace netmanip
