#ifndef RELUMIP_MIP_MODEL_HPP_
#define RELUMIP_MIP_MODEL_HPP_

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace relumip {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using VarId = std::int32_t;
inline constexpr VarId kNoVar = -1;

enum class VarKind { Continuous, Binary, Integer };

/// What a variable stands for in the encoded network; used for decoding and diagnostics.
enum class VarRole {
  UnitOutput,       // x
  Complement,       // x-bar
  Indicator,        // z
  DisjunctA,        // y^a
  DisjunctB,        // y^b
  PoolIndicator,    // delta
  Distance,         // d
  TrainingWeight,   // w
  TrainingProduct,  // u
  Auxiliary,
};

struct VarMeta {
  int layer = -1;
  int neuron = -1;
  VarRole role = VarRole::Auxiliary;
};

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lo = 0.0;
  double hi = kInf;
  std::optional<VarMeta> meta;

  bool is_integer() const { return kind != VarKind::Continuous; }
};

struct Term {
  VarId var;
  double coef;
  friend bool operator==(const Term&, const Term&) = default;
};

enum class Sense { LessEqual, Equal, GreaterEqual };
enum class ObjSense { Minimize, Maximize };

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

struct Objective {
  ObjSense sense = ObjSense::Minimize;
  std::vector<Term> terms;
};

/// Formulation-agnostic mixed-integer linear model. Variables and constraints keep insertion
/// order, which is also the column/row order of every exported file.
class MipModel {
 public:
  explicit MipModel(std::string name = "relumip") : name_(std::move(name)) {}

  VarId add_variable(const std::string& name, VarKind kind, double lo, double hi,
                     std::optional<VarMeta> meta = std::nullopt);
  VarId add_continuous(const std::string& name, double lo, double hi,
                       std::optional<VarMeta> meta = std::nullopt) {
    return add_variable(name, VarKind::Continuous, lo, hi, meta);
  }
  VarId add_binary(const std::string& name, std::optional<VarMeta> meta = std::nullopt) {
    return add_variable(name, VarKind::Binary, 0.0, 1.0, meta);
  }

  /// Terms on the same variable are summed; terms whose summed coefficient is exactly zero drop.
  int add_constraint(const std::string& name, std::vector<Term> terms, Sense sense, double rhs);
  void set_objective(ObjSense sense, std::vector<Term> terms);
  void set_bounds(VarId v, double lo, double hi);

  const std::string& name() const { return name_; }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return cons_; }
  const Objective& objective() const { return obj_; }
  const Variable& variable(VarId v) const;
  std::size_t num_variables() const { return vars_.size(); }
  std::size_t num_constraints() const { return cons_.size(); }
  std::size_t count_kind(VarKind kind) const;

  std::optional<VarId> find_variable(const std::string& name) const;
  std::optional<int> find_constraint(const std::string& name) const;

  /// Objective value of a full assignment.
  double evaluate_objective(const std::vector<double>& x) const;
  /// Largest bound, row, or integrality violation of an assignment.
  double max_violation(const std::vector<double>& x, bool check_integrality = true) const;

 private:
  std::vector<Term> coalesce(std::vector<Term> terms, const std::string& where) const;
  void check_name(const std::string& name) const;

  std::string name_;
  std::vector<Variable> vars_;
  std::vector<Constraint> cons_;
  Objective obj_;
  std::unordered_map<std::string, VarId> var_index_;
  std::unordered_map<std::string, int> con_index_;
};

/// Free-format MPS. Deterministic, 17 significant digits, objective row named OBJ.
std::string export_mps(const MipModel& model);
MipModel parse_mps(const std::string& text);

/// CPLEX-LP-style text.
std::string export_lp(const MipModel& model);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_number(double v);

}  // namespace relumip

#endif  // RELUMIP_MIP_MODEL_HPP_
