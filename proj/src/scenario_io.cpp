#include "netmanip/scenario_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "netmanip/choice.hpp"
#include "netmanip/net.hpp"

namespace netmanip {

using nlohmann::json;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (known.find(it.key()) == known.end())
      throw ParseError(where + ": unknown key '" + it.key() + "'");
}

double number_at(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
  if (!obj[key].is_number()) throw ParseError(where + ": '" + key + "' must be a number");
  return obj[key].get<double>();
}

Vector vector_at(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
  const json& arr = obj[key];
  if (!arr.is_array() || arr.empty()) throw ParseError(where + ": '" + key + "' must be an array");
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number())
      throw ParseError(where + ": '" + key + "' entry " + std::to_string(i) + " is not a number");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

Matrix matrix_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty()) throw ParseError(where + ": expected an array of rows");
  const std::size_t cols = arr[0].is_array() ? arr[0].size() : 0;
  if (cols == 0) throw ParseError(where + ": rows must be non-empty arrays");
  Matrix m(static_cast<Eigen::Index>(arr.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_array() || arr[i].size() != cols)
      throw ParseError(where + ": row " + std::to_string(i) + " has inconsistent length");
    for (std::size_t j = 0; j < cols; ++j) {
      if (!arr[i][j].is_number())
        throw ParseError(where + ": entry (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") is not a number");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = arr[i][j].get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Choice models use 1-based alternative indices on the file surface.
ChoiceModel parse_choice_model(const json& obj, int alternatives, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": choice_model must be an object");
  if (!obj.contains("type") || !obj["type"].is_string())
    throw ParseError(where + ": choice_model needs a string 'type'");
  const std::string type = obj["type"].get<std::string>();
  try {
    if (type == "mnl") {
      reject_unknown_keys(obj, {"type", "mu"}, where);
      return ChoiceModel::mnl(alternatives, number_at(obj, "mu", where));
    }
    if (type == "nl") {
      reject_unknown_keys(obj, {"type", "nests", "mu"}, where);
      if (!obj.contains("nests") || !obj["nests"].is_array())
        throw ParseError(where + ": nested model needs a 'nests' array");
      std::vector<std::vector<int>> nests;
      for (const auto& nest : obj["nests"]) {
        if (!nest.is_array()) throw ParseError(where + ": each nest must be an array");
        std::vector<int> members;
        for (const auto& a : nest) {
          if (!a.is_number_integer()) throw ParseError(where + ": nest members must be integers");
          members.push_back(a.get<int>() - 1);
        }
        nests.push_back(std::move(members));
      }
      const Vector mu = vector_at(obj, "mu", where);
      return ChoiceModel::nested(alternatives, std::move(nests),
                                 std::vector<double>(mu.data(), mu.data() + mu.size()));
    }
  } catch (const InvalidModel& e) {
    throw InvalidModel(where + ": " + e.what());
  }
  throw InvalidModel(where + ": unknown choice model type '" + type + "'");
}

json choice_model_to_json(const ChoiceModel& model) {
  json obj;
  if (model.kind() == ChoiceModel::Kind::Mnl) {
    obj["type"] = "mnl";
    obj["mu"] = model.mu();
    return obj;
  }
  obj["type"] = "nl";
  json nests = json::array();
  for (const auto& nest : model.nests()) {
    json members = json::array();
    for (int a : nest) members.push_back(a + 1);
    nests.push_back(std::move(members));
  }
  obj["nests"] = std::move(nests);
  obj["mu"] = model.nest_mu();
  return obj;
}

}  // namespace

Scenario parse_scenario_json(const json& doc, const std::string& base_dir,
                             std::vector<std::string>* notices) {
  if (!doc.is_object()) throw ParseError("scenario: top level must be an object");
  reject_unknown_keys(doc,
                      {"network", "horizon", "agents", "organizations", "delta1", "delta2",
                       "max_iters", "seed", "x0"},
                      "scenario");
  if (!doc.contains("network")) throw ParseError("scenario: missing 'network'");
  if (!doc.contains("agents") || !doc["agents"].is_array() || doc["agents"].empty())
    throw ParseError("scenario: 'agents' must be a non-empty array");
  if (!doc.contains("organizations") || !doc["organizations"].is_array() ||
      doc["organizations"].empty())
    throw ParseError("scenario: 'organizations' must be a non-empty array");

  Matrix raw_network;
  if (doc["network"].is_string()) {
    std::filesystem::path p = doc["network"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    raw_network = load_matrix_csv(p.string());
  } else {
    raw_network = matrix_from_json(doc["network"], "scenario network");
  }

  Scenario s{TransitionMatrix(raw_network)};
  s.horizon = doc.contains("horizon")
                  ? static_cast<int>(number_at(doc, "horizon", "scenario"))
                  : 1;

  const int k = static_cast<int>(doc["organizations"].size());
  for (std::size_t i = 0; i < doc["agents"].size(); ++i) {
    const json& a = doc["agents"][i];
    const std::string where = "agent " + std::to_string(i);
    if (!a.is_object()) throw ParseError(where + ": must be an object");
    reject_unknown_keys(a, {"aspired_state", "choice_model"}, where);
    AgentProfile profile{vector_at(a, "aspired_state", where),
                         parse_choice_model(a.contains("choice_model") ? a["choice_model"] : json(),
                                            k, where)};
    s.agents.push_back(std::move(profile));
  }
  for (std::size_t j = 0; j < doc["organizations"].size(); ++j) {
    const json& o = doc["organizations"][j];
    const std::string where = "organization " + std::to_string(j);
    if (!o.is_object()) throw ParseError(where + ": must be an object");
    reject_unknown_keys(o, {"eta", "tau", "anchor"}, where);
    OrganizationProfile org;
    org.eta = number_at(o, "eta", where);
    org.tau = number_at(o, "tau", where);
    org.anchor = vector_at(o, "anchor", where);
    s.orgs.push_back(std::move(org));
  }

  s.delta1 = doc.contains("delta1") ? number_at(doc, "delta1", "scenario") : 0.0;
  s.delta2 = doc.contains("delta2") ? number_at(doc, "delta2", "scenario") : 0.0;
  s.max_iters =
      doc.contains("max_iters") ? static_cast<int>(number_at(doc, "max_iters", "scenario")) : 100;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer()) throw ParseError("scenario: 'seed' must be an integer");
    s.seed = doc["seed"].get<std::uint64_t>();
  } else {
    s.seed = 0;
    if (notices != nullptr) notices->push_back("seed omitted; defaulting to 0");
  }
  if (doc.contains("x0")) s.x0 = matrix_from_json(doc["x0"], "scenario x0");

  validate_scenario(s);
  return s;
}

Scenario parse_scenario(const std::string& path, std::vector<std::string>* notices) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return parse_scenario_json(doc, std::filesystem::path(path).parent_path().string(), notices);
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["network"] = matrix_to_json(s.network.matrix());
  doc["horizon"] = s.horizon;
  doc["agents"] = json::array();
  for (const auto& agent : s.agents) {
    json a;
    a["aspired_state"] = std::vector<double>(agent.aspired_state.data(),
                                             agent.aspired_state.data() + agent.aspired_state.size());
    a["choice_model"] = choice_model_to_json(agent.model);
    doc["agents"].push_back(std::move(a));
  }
  doc["organizations"] = json::array();
  for (const auto& org : s.orgs) {
    json o;
    o["eta"] = org.eta;
    o["tau"] = org.tau;
    o["anchor"] = std::vector<double>(org.anchor.data(), org.anchor.data() + org.anchor.size());
    doc["organizations"].push_back(std::move(o));
  }
  doc["delta1"] = s.delta1;
  doc["delta2"] = s.delta2;
  doc["max_iters"] = s.max_iters;
  doc["seed"] = s.seed;
  doc["x0"] = matrix_to_json(s.x0);
  return doc;
}

ReferenceOptimum load_reference(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open reference file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(path + ": expected an object");
  reject_unknown_keys(doc, {"x_star", "p_star", "block_gap"}, "reference");
  if (!doc.contains("x_star") || !doc.contains("p_star"))
    throw ParseError(path + ": needs 'x_star' and 'p_star'");
  ReferenceOptimum ref;
  ref.x_star = matrix_from_json(doc["x_star"], "x_star");
  ref.p_star = matrix_from_json(doc["p_star"], "p_star");
  if (doc.contains("block_gap")) ref.block_gap = doc["block_gap"].get<double>();
  return ref;
}

json reference_to_json(const ReferenceOptimum& ref) {
  json doc;
  doc["x_star"] = matrix_to_json(ref.x_star);
  doc["p_star"] = matrix_to_json(ref.p_star);
  doc["block_gap"] = ref.block_gap;
  return doc;
}

void write_trace_csv(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open trace output " + path);
  out.precision(17);
  out << "iter,phi,dist_x,dist_p,bound_x,bound_p,gap_p_realized,gap_x_realized\n";
  for (const auto& rec : trace.iterations) {
    out << rec.iter << ',' << rec.phi << ',' << rec.dist_x << ',' << rec.dist_p << ','
        << rec.bound_x << ',' << rec.bound_p << ',' << rec.gap_p << ',' << rec.gap_x << '\n';
  }
}

json trace_to_json(const RunTrace& trace) {
  json rows = json::array();
  for (const auto& rec : trace.iterations) {
    json row;
    row["iter"] = rec.iter;
    row["phi"] = rec.phi;
    row["dist_x"] = rec.dist_x;
    row["dist_p"] = rec.dist_p;
    row["bound_x"] = rec.bound_x;
    row["bound_p"] = rec.bound_p;
    row["gap_p_realized"] = rec.gap_p;
    row["gap_x_realized"] = rec.gap_x;
    rows.push_back(std::move(row));
  }
  return rows;
}

int bound_violations(const RunTrace& trace) {
  constexpr double kTol = 1e-9;
  int violations = 0;
  for (const auto& rec : trace.iterations) {
    if (std::isfinite(rec.bound_x) && std::isfinite(rec.dist_x) && rec.dist_x > rec.bound_x + kTol)
      ++violations;
    if (std::isfinite(rec.bound_p) && std::isfinite(rec.dist_p) && rec.dist_p > rec.bound_p + kTol)
      ++violations;
  }
  return violations;
}

json make_report(const RunTrace& trace, double wall_seconds) {
  json report;
  report["mode"] = trace.inexact ? "inexact" : "exact";
  report["iterations"] = trace.iterations.empty() ? 0 : trace.iterations.back().iter;
  report["stopped_on_stall"] = trace.stopped_on_stall;
  report["wall_clock_s"] = wall_seconds;
  report["warnings"] = trace.warnings;

  json consts;
  consts["sigma1"] = trace.constants.sigma1;
  consts["sigma2"] = trace.constants.sigma2;
  consts["L1"] = trace.constants.L1;
  consts["L2"] = trace.constants.L2;
  consts["lambda"] = trace.constants.lambda;
  consts["stable"] = trace.constants.stable;
  report["constants"] = std::move(consts);

  if (!trace.iterations.empty()) {
    const auto& last = trace.iterations.back();
    report["final_phi"] = last.phi;
    if (std::isfinite(last.dist_x)) report["final_dist_x"] = last.dist_x;
    if (std::isfinite(last.dist_p)) report["final_dist_p"] = last.dist_p;
  }

  report["assumption_violated"] = !trace.constants.stable;
  if (trace.constants.stable) {
    const auto radii = limit_radius(trace.constants, trace.delta1, trace.delta2);
    report["limit_radius_x"] = radii.first;
    report["limit_radius_p"] = radii.second;
    if (trace.has_reference) report["bound_violations"] = bound_violations(trace);
    const auto slope = fitted_decay_slope(trace);
    if (slope.has_value()) report["rate_estimate"] = std::exp(*slope);
  }
  return report;
}

}  // namespace netmanip
