#include "relumip/mip_model.hpp"

#include <algorithm>
#include <cmath>

#include "relumip/errors.hpp"

namespace relumip {

namespace {

bool integral_or_infinite(double v) { return std::isinf(v) || v == std::floor(v); }

}  // namespace

void MipModel::check_name(const std::string& name) const {
  if (name.empty()) throw ModelError("empty name");
  for (char c : name)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
      throw ModelError("name '" + name + "' contains whitespace");
}

VarId MipModel::add_variable(const std::string& name, VarKind kind, double lo, double hi,
                             std::optional<VarMeta> meta) {
  check_name(name);
  if (var_index_.count(name)) throw ModelError("duplicate variable name '" + name + "'");
  if (std::isnan(lo) || std::isnan(hi) || lo > hi)
    throw ModelError("variable '" + name + "' has inverted bounds");
  if (kind == VarKind::Binary && (lo < 0.0 || hi > 1.0))
    throw ModelError("binary variable '" + name + "' has bounds outside [0, 1]");
  if (kind == VarKind::Integer && (!integral_or_infinite(lo) || !integral_or_infinite(hi)))
    throw ModelError("integer variable '" + name + "' has fractional bounds");
  const auto id = static_cast<VarId>(vars_.size());
  vars_.push_back(Variable{name, kind, lo, hi, meta});
  var_index_.emplace(name, id);
  return id;
}

std::vector<Term> MipModel::coalesce(std::vector<Term> terms, const std::string& where) const {
  std::vector<Term> out;
  std::unordered_map<VarId, std::size_t> slot;
  for (const Term& t : terms) {
    if (t.var < 0 || static_cast<std::size_t>(t.var) >= vars_.size())
      throw ModelError(where + " references unknown variable id " + std::to_string(t.var));
    if (!std::isfinite(t.coef)) throw ModelError(where + " has a non-finite coefficient");
    auto it = slot.find(t.var);
    if (it == slot.end()) {
      slot.emplace(t.var, out.size());
      out.push_back(t);
    } else {
      out[it->second].coef += t.coef;
    }
  }
  std::erase_if(out, [](const Term& t) { return t.coef == 0.0; });
  return out;
}

int MipModel::add_constraint(const std::string& name, std::vector<Term> terms, Sense sense,
                             double rhs) {
  check_name(name);
  if (name == "OBJ") throw ModelError("'OBJ' is reserved for the objective row");
  if (con_index_.count(name)) throw ModelError("duplicate constraint name '" + name + "'");
  if (!std::isfinite(rhs)) throw ModelError("constraint '" + name + "' has a non-finite rhs");
  auto coalesced = coalesce(std::move(terms), "constraint '" + name + "'");
  const int id = static_cast<int>(cons_.size());
  cons_.push_back(Constraint{name, std::move(coalesced), sense, rhs});
  con_index_.emplace(name, id);
  return id;
}

void MipModel::set_objective(ObjSense sense, std::vector<Term> terms) {
  obj_ = Objective{sense, coalesce(std::move(terms), "objective")};
}

void MipModel::set_bounds(VarId v, double lo, double hi) {
  if (v < 0 || static_cast<std::size_t>(v) >= vars_.size())
    throw ModelError("unknown variable id " + std::to_string(v));
  if (std::isnan(lo) || std::isnan(hi) || lo > hi)
    throw ModelError("variable '" + vars_[v].name + "' given inverted bounds");
  vars_[v].lo = lo;
  vars_[v].hi = hi;
}

const Variable& MipModel::variable(VarId v) const {
  if (v < 0 || static_cast<std::size_t>(v) >= vars_.size())
    throw ModelError("unknown variable id " + std::to_string(v));
  return vars_[v];
}

std::size_t MipModel::count_kind(VarKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(vars_.begin(), vars_.end(), [&](const Variable& v) { return v.kind == kind; }));
}

std::optional<VarId> MipModel::find_variable(const std::string& name) const {
  auto it = var_index_.find(name);
  if (it == var_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> MipModel::find_constraint(const std::string& name) const {
  auto it = con_index_.find(name);
  if (it == con_index_.end()) return std::nullopt;
  return it->second;
}

double MipModel::evaluate_objective(const std::vector<double>& x) const {
  double acc = 0.0;
  for (const Term& t : obj_.terms) acc += t.coef * x.at(t.var);
  return acc;
}

double MipModel::max_violation(const std::vector<double>& x, bool check_integrality) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    const Variable& v = vars_[j];
    worst = std::max({worst, v.lo - x.at(j), x.at(j) - v.hi});
    if (check_integrality && v.is_integer()) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
  }
  for (const Constraint& c : cons_) {
    double act = 0.0;
    for (const Term& t : c.terms) act += t.coef * x.at(t.var);
    switch (c.sense) {
      case Sense::LessEqual:
        worst = std::max(worst, act - c.rhs);
        break;
      case Sense::GreaterEqual:
        worst = std::max(worst, c.rhs - act);
        break;
      case Sense::Equal:
        worst = std::max(worst, std::abs(act - c.rhs));
        break;
    }
  }
  return worst;
}

}  // namespace relumip
