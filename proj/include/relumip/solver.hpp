#ifndef RELUMIP_SOLVER_HPP_
#define RELUMIP_SOLVER_HPP_

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "relumip/mip_model.hpp"

namespace relumip {

enum class SolveStatus { Optimal, Feasible, Infeasible, Unbounded, LimitNoIncumbent };

const char* status_name(SolveStatus s);
SolveStatus parse_status(const std::string& s);

enum class BranchRule { MostFractional };
enum class NodeSelection { BestBound, DepthFirst };

struct SolverParams {
  double time_limit = std::numeric_limits<double>::infinity();  // seconds
  double gap_tolerance = 1e-6;
  double integrality_tolerance = 1e-6;
  double feasibility_tolerance = 1e-7;
  std::int64_t node_limit = std::numeric_limits<std::int64_t>::max();
  int root_cut_rounds = 10;
  int node_cut_rounds = 10;
  int cut_depth = 2;            // nodes at depth <= this also run separation
  int max_cuts_per_round = 50;
  BranchRule branching = BranchRule::MostFractional;
  NodeSelection node_selection = NodeSelection::BestBound;
  std::size_t node_memory_cap = 200000;  // open nodes before switching to depth-first
  std::uint64_t seed = 0;

  void validate() const;
};

struct SolveResult {
  SolveStatus status = SolveStatus::LimitNoIncumbent;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::infinity();
  std::vector<double> incumbent;
  std::int64_t nodes = 0;
  std::int64_t cuts = 0;
  std::int64_t lp_iterations = 0;
  double time_seconds = 0.0;
  std::optional<double> lp_relaxation;  // root LP value before cuts
  bool exact = true;                    // false when a node LP had to be abandoned
  std::vector<std::string> warnings;
  std::string label;

  bool has_incumbent() const { return !incumbent.empty(); }
};

/// Relative gap |obj - bound| / max(1e-10, |obj|).
double relative_gap(double objective, double bound);

/// A globally valid linear inequality proposed by a separator.
struct Cut {
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

class CutSeparator {
 public:
  virtual ~CutSeparator() = default;
  /// Returns cuts violated by the LP point `x` (indexed by model variable id).
  virtual std::vector<Cut> separate(std::span<const double> x) = 0;
};

/// Solves the LP relaxation (integrality dropped).
SolveResult solve_lp(const MipModel& model, const SolverParams& params = {});

/// Branch-and-bound. `separator` is consulted at the root and at shallow nodes.
SolveResult solve_mip(const MipModel& model, const SolverParams& params = {},
                      CutSeparator* separator = nullptr);

/// Reusable bounded-variable primal simplex over the relaxation of a model. Keeps its basis
/// between calls so repeated solves with changed bounds or objectives warm-start.
class LpEngine {
 public:
  enum class Status { Optimal, Infeasible, Unbounded, Failed };

  struct Basis {
    std::vector<int> basic;         // row -> variable (structural j < n, logical n + i)
    std::vector<signed char> at_upper;  // per variable, meaningful when nonbasic
  };

  explicit LpEngine(const MipModel& model, double feasibility_tolerance = 1e-7);
  ~LpEngine();
  LpEngine(LpEngine&&) noexcept;
  LpEngine& operator=(LpEngine&&) noexcept;

  void set_objective(ObjSense sense, std::span<const Term> terms);
  void set_bounds(VarId v, double lo, double hi);
  double lower(VarId v) const;
  double upper(VarId v) const;
  void add_row(std::span<const Term> terms, Sense sense, double rhs);

  Status solve(std::int64_t max_iterations = -1);
  double objective_value() const;
  /// Structural values of the last solve.
  std::vector<double> values() const;
  std::int64_t iterations() const;
  std::size_t num_rows() const;

  Basis basis() const;
  void set_basis(const Basis& b);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// SolveResult documents. `deterministic` omits wall time so repeated runs compare byte-for-byte.
nlohmann::json solve_result_to_json(const SolveResult& r, const MipModel* model = nullptr,
                                    bool deterministic = false);
SolveResult solve_result_from_json(const nlohmann::json& j);
std::string solve_result_to_string(const SolveResult& r, const MipModel* model = nullptr,
                                   bool deterministic = false);

}  // namespace relumip

#endif  // RELUMIP_SOLVER_HPP_
