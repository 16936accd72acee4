#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include "relumip/errors.hpp"
#include "relumip/solver.hpp"

namespace relumip {

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "Optimal";
    case SolveStatus::Feasible:
      return "Feasible";
    case SolveStatus::Infeasible:
      return "Infeasible";
    case SolveStatus::Unbounded:
      return "Unbounded";
    case SolveStatus::LimitNoIncumbent:
      return "LimitNoIncumbent";
  }
  return "?";
}

SolveStatus parse_status(const std::string& s) {
  for (SolveStatus st : {SolveStatus::Optimal, SolveStatus::Feasible, SolveStatus::Infeasible,
                         SolveStatus::Unbounded, SolveStatus::LimitNoIncumbent})
    if (s == status_name(st)) return st;
  throw ParseError("unknown solve status '" + s + "'");
}

double relative_gap(double objective, double bound) {
  return std::abs(objective - bound) / std::max(1e-10, std::abs(objective));
}

void SolverParams::validate() const {
  if (!(gap_tolerance > 0) || !(integrality_tolerance > 0) || !(feasibility_tolerance > 0))
    throw ModelError("solver tolerances must be positive");
  if (time_limit < 0 || node_limit < 0 || root_cut_rounds < 0 || node_cut_rounds < 0 ||
      max_cuts_per_round < 0)
    throw ModelError("solver limits must be nonnegative");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool same_cut(const Cut& a, const Cut& b) {
  if (a.sense != b.sense || a.terms.size() != b.terms.size()) return false;
  if (std::abs(a.rhs - b.rhs) > 1e-12) return false;
  for (std::size_t k = 0; k < a.terms.size(); ++k) {
    if (a.terms[k].var != b.terms[k].var) return false;
    if (std::abs(a.terms[k].coef - b.terms[k].coef) > 1e-12) return false;
  }
  return true;
}

Cut normalized(Cut c) {
  std::sort(c.terms.begin(), c.terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::erase_if(c.terms, [](const Term& t) { return t.coef == 0.0; });
  return c;
}

struct Node {
  std::int64_t id = 0;
  int depth = 0;
  double bound = -kInf;  // internal minimization sense
  std::vector<double> lo, hi;  // per integer variable
  std::optional<LpEngine::Basis> basis;
};

class BranchAndBound {
 public:
  BranchAndBound(const MipModel& model, const SolverParams& params, CutSeparator* sep)
      : model_(model), params_(params), sep_(sep), lp_(model, params.feasibility_tolerance) {
    sign_ = model.objective().sense == ObjSense::Maximize ? -1.0 : 1.0;
    for (std::size_t j = 0; j < model.num_variables(); ++j)
      if (model.variables()[j].is_integer()) ints_.push_back(static_cast<VarId>(j));
  }

  SolveResult run() {
    const auto t0 = Clock::now();
    SolveResult res;

    Node root;
    root.id = next_id_++;
    for (VarId v : ints_) {
      const Variable& var = model_.variables()[v];
      root.lo.push_back(std::ceil(var.lo - params_.integrality_tolerance));
      root.hi.push_back(std::floor(var.hi + params_.integrality_tolerance));
      if (root.lo.back() > root.hi.back()) {
        res.status = SolveStatus::Infeasible;
        res.time_seconds = seconds_since(t0);
        return res;
      }
    }
    push(std::move(root));

    bool limit_hit = false;
    bool gap_closed = false;
    while (!open_.empty()) {
      if (seconds_since(t0) > params_.time_limit || res.nodes >= params_.node_limit) {
        limit_hit = true;
        break;
      }
      if (have_incumbent_) {
        const double lb = by_bound_.begin()->first;
        if (incumbent_ - lb <= params_.gap_tolerance * std::max(1e-10, std::abs(incumbent_))) {
          gap_closed = true;
          break;
        }
      }
      Node node = pop();
      if (have_incumbent_ && node.bound >= incumbent_ - prune_eps()) continue;
      ++res.nodes;

      for (std::size_t k = 0; k < ints_.size(); ++k) lp_.set_bounds(ints_[k], node.lo[k], node.hi[k]);
      if (node.basis) lp_.set_basis(*node.basis);
      LpEngine::Status st = lp_.solve();

      if (st == LpEngine::Status::Optimal && node.id == 0)
        res.lp_relaxation = lp_.objective_value();

      if (st == LpEngine::Status::Optimal && sep_ &&
          node.depth <= params_.cut_depth) {
        const int rounds = node.id == 0 ? params_.root_cut_rounds : params_.node_cut_rounds;
        st = cut_rounds(rounds, res);
      }

      if (st == LpEngine::Status::Failed) {
        res.exact = false;
        res.warnings.push_back("node " + std::to_string(node.id) + ": LP failed, node pruned");
        continue;
      }
      if (st == LpEngine::Status::Infeasible) continue;
      if (st == LpEngine::Status::Unbounded) {
        if (node.id == 0) {
          res.status = SolveStatus::Unbounded;
          finish(res, t0);
          return res;
        }
        res.exact = false;
        res.warnings.push_back("node " + std::to_string(node.id) + ": LP unbounded, node pruned");
        continue;
      }

      const double obj = sign_ * lp_.objective_value();
      if (have_incumbent_ && obj >= incumbent_ - prune_eps()) continue;
      const std::vector<double> x = lp_.values();

      int branch_k = -1;
      double best_frac = params_.integrality_tolerance;
      for (std::size_t k = 0; k < ints_.size(); ++k) {
        const double v = x[ints_[k]];
        const double f = std::min(v - std::floor(v), std::ceil(v) - v);
        if (f > best_frac) {
          best_frac = f;
          branch_k = static_cast<int>(k);
        }
      }
      if (branch_k < 0) {
        have_incumbent_ = true;
        incumbent_ = obj;
        incumbent_x_ = x;
        continue;
      }

      const double v = x[ints_[branch_k]];
      LpEngine::Basis basis = lp_.basis();
      Node down{next_id_++, node.depth + 1, obj, node.lo, node.hi, basis};
      down.hi[branch_k] = std::floor(v);
      Node up{next_id_++, node.depth + 1, obj, std::move(node.lo), std::move(node.hi), std::move(basis)};
      up.lo[branch_k] = std::ceil(v);
      push(std::move(down));
      push(std::move(up));
    }

    if (have_incumbent_) {
      res.incumbent = incumbent_x_;
      res.objective = model_.evaluate_objective(incumbent_x_);
      if (limit_hit) {
        res.status = SolveStatus::Feasible;
        res.bound = sign_ * std::min(incumbent_, by_bound_.begin()->first);
      } else if (gap_closed) {
        res.status = SolveStatus::Optimal;
        res.bound = sign_ * std::min(incumbent_, by_bound_.begin()->first);
      } else {
        res.status = SolveStatus::Optimal;
        res.bound = res.objective;
      }
      res.gap = relative_gap(res.objective, res.bound);
    } else if (limit_hit) {
      res.status = SolveStatus::LimitNoIncumbent;
      res.bound = sign_ * by_bound_.begin()->first;
    } else {
      res.status = SolveStatus::Infeasible;
    }
    finish(res, t0);
    return res;
  }

 private:
  double prune_eps() const { return 1e-9 * std::max(1.0, std::abs(incumbent_)); }

  void finish(SolveResult& res, Clock::time_point t0) {
    res.lp_iterations = lp_.iterations();
    res.time_seconds = seconds_since(t0);
  }

  LpEngine::Status cut_rounds(int rounds, SolveResult& res) {
    LpEngine::Status st = LpEngine::Status::Optimal;
    for (int round = 0; round < rounds; ++round) {
      const std::vector<double> x = lp_.values();
      std::vector<Cut> found = sep_->separate(x);
      int added = 0;
      for (Cut& c : found) {
        if (added >= params_.max_cuts_per_round) break;
        Cut nc = normalized(std::move(c));
        if (nc.terms.empty()) continue;
        bool dup = false;
        for (const Cut& p : pool_)
          if (same_cut(p, nc)) {
            dup = true;
            break;
          }
        if (dup) continue;
        lp_.add_row(nc.terms, nc.sense, nc.rhs);
        pool_.push_back(std::move(nc));
        ++added;
      }
      if (added == 0) break;
      res.cuts += added;
      st = lp_.solve();
      if (st != LpEngine::Status::Optimal) break;
    }
    return st;
  }

  void push(Node n) {
    by_bound_.emplace(n.bound, n.id);
    by_depth_.emplace(n.depth, n.id);
    open_.emplace(n.id, std::move(n));
  }

  Node pop() {
    std::int64_t id;
    const bool dfs = params_.node_selection == NodeSelection::DepthFirst ||
                     open_.size() > params_.node_memory_cap;
    if (dfs) {
      // Deepest first; among equals the newest, so the search dives.
      auto it = std::prev(by_depth_.end());
      const int depth = it->first;
      auto last = by_depth_.upper_bound({depth, std::numeric_limits<std::int64_t>::max()});
      id = std::prev(last)->second;
    } else {
      id = by_bound_.begin()->second;
    }
    auto it = open_.find(id);
    Node n = std::move(it->second);
    open_.erase(it);
    by_bound_.erase({n.bound, n.id});
    by_depth_.erase({n.depth, n.id});
    return n;
  }

  const MipModel& model_;
  const SolverParams& params_;
  CutSeparator* sep_;
  LpEngine lp_;
  double sign_ = 1.0;
  std::vector<VarId> ints_;
  std::vector<Cut> pool_;

  std::map<std::int64_t, Node> open_;
  std::set<std::pair<double, std::int64_t>> by_bound_;
  std::set<std::pair<int, std::int64_t>> by_depth_;
  std::int64_t next_id_ = 0;

  bool have_incumbent_ = false;
  double incumbent_ = kInf;
  std::vector<double> incumbent_x_;
};

}  // namespace

SolveResult solve_lp(const MipModel& model, const SolverParams& params) {
  params.validate();
  const auto t0 = Clock::now();
  LpEngine lp(model, params.feasibility_tolerance);
  const LpEngine::Status st = lp.solve();
  SolveResult res;
  switch (st) {
    case LpEngine::Status::Optimal:
      res.status = SolveStatus::Optimal;
      res.incumbent = lp.values();
      res.objective = lp.objective_value();
      res.bound = res.objective;
      res.gap = 0.0;
      res.lp_relaxation = res.objective;
      break;
    case LpEngine::Status::Infeasible:
      res.status = SolveStatus::Infeasible;
      break;
    case LpEngine::Status::Unbounded:
      res.status = SolveStatus::Unbounded;
      break;
    case LpEngine::Status::Failed:
      res.status = SolveStatus::LimitNoIncumbent;
      res.exact = false;
      res.warnings.push_back("simplex iteration limit reached (numerical trouble)");
      break;
  }
  res.lp_iterations = lp.iterations();
  res.time_seconds = seconds_since(t0);
  return res;
}

SolveResult solve_mip(const MipModel& model, const SolverParams& params, CutSeparator* separator) {
  params.validate();
  BranchAndBound bb(model, params, separator);
  return bb.run();
}

}  // namespace relumip
