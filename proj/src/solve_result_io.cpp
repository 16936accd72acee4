#include <cmath>

#include "relumip/errors.hpp"
#include "relumip/json_util.hpp"
#include "relumip/solver.hpp"

namespace relumip {

namespace {

using nlohmann::json;

// JSON has no NaN or infinity; encode them as null / strings.
json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double to_number(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw ParseError("bad number '" + s + "' in solve result");
  }
  return j.get<double>();
}

}  // namespace

json solve_result_to_json(const SolveResult& r, const MipModel* model, bool deterministic) {
  json j = json::object();
  if (!r.label.empty()) j["label"] = r.label;
  j["status"] = status_name(r.status);
  j["objective"] = number(r.objective);
  j["bound"] = number(r.bound);
  j["gap"] = number(r.gap);
  j["nodes"] = r.nodes;
  j["cuts"] = r.cuts;
  j["lp_iterations"] = r.lp_iterations;
  if (!deterministic) j["time"] = r.time_seconds;
  if (r.lp_relaxation) j["lp_relaxation"] = number(*r.lp_relaxation);
  j["exact"] = r.exact;
  j["warnings"] = r.warnings;
  if (model) {
    j["model"] = {{"name", model->name()},
                  {"variables", model->num_variables()},
                  {"constraints", model->num_constraints()},
                  {"binaries", model->count_kind(VarKind::Binary)},
                  {"integers", model->count_kind(VarKind::Integer)}};
    json inc = json::object();
    for (std::size_t k = 0; k < r.incumbent.size() && k < model->num_variables(); ++k)
      inc[model->variables()[k].name] = r.incumbent[k];
    j["incumbent"] = std::move(inc);
  } else {
    j["incumbent"] = r.incumbent;
  }
  return j;
}

SolveResult solve_result_from_json(const json& j) {
  try {
    SolveResult r;
    if (j.contains("label")) r.label = j["label"].get<std::string>();
    r.status = parse_status(require(j, "status").get<std::string>());
    r.objective = to_number(require(j, "objective"));
    r.bound = to_number(require(j, "bound"));
    r.gap = to_number(require(j, "gap"));
    r.nodes = require(j, "nodes").get<std::int64_t>();
    r.cuts = require(j, "cuts").get<std::int64_t>();
    if (j.contains("lp_iterations")) r.lp_iterations = j["lp_iterations"].get<std::int64_t>();
    if (j.contains("time")) r.time_seconds = j["time"].get<double>();
    if (j.contains("lp_relaxation")) r.lp_relaxation = to_number(j["lp_relaxation"]);
    if (j.contains("exact")) r.exact = j["exact"].get<bool>();
    if (j.contains("warnings")) r.warnings = j["warnings"].get<std::vector<std::string>>();
    if (j.contains("incumbent")) {
      const json& inc = j["incumbent"];
      // Named incumbents are keyed by variable name; order is recovered by the caller's model.
      if (inc.is_array()) r.incumbent = inc.get<std::vector<double>>();
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("solve result: ") + e.what());
  }
}

std::string solve_result_to_string(const SolveResult& r, const MipModel* model, bool deterministic) {
  return solve_result_to_json(r, model, deterministic).dump(2) + "\n";
}

}  // namespace relumip
