// Dense-tableau bounded-variable primal simplex.
//
// Every row i gets a logical variable r_i with A_i x - r_i = 0, bounded by the row sense, so
// the system is homogeneous and basic values follow from nonbasic ones: x_B(i) = -sum_j T_ij x_j.
// Phase 1 minimizes the sum of bound violations of basic variables (composite pricing);
// phase 2 minimizes the objective. Dantzig pricing, Bland's rule after a run of degenerate
// steps, periodic reinversion from the original rows.

#include <algorithm>
#include <cmath>
#include <set>

#include "relumip/errors.hpp"
#include "relumip/solver.hpp"

namespace relumip {

namespace {

constexpr double kPivotTol = 1e-7;
constexpr double kDualTol = 1e-9;
constexpr double kSingularTol = 1e-11;
constexpr int kRefactorEvery = 100;
constexpr int kBlandAfter = 1000;

}  // namespace

struct LpEngine::Impl {
  int n = 0;  // structural columns
  int m = 0;  // rows
  double feas_tol = 1e-7;
  std::vector<double> lo, hi;  // n + m
  std::vector<double> cost;    // n, internal minimization
  bool maximize = false;
  std::vector<std::vector<Term>> rows;  // original sparse rows

  std::vector<std::vector<double>> T;  // m x (n + m)
  std::vector<int> head;               // row -> basic variable
  std::vector<int> pos;                // variable -> row, -1 when nonbasic
  std::vector<signed char> at_upper;
  std::vector<double> x;

  std::int64_t iterations = 0;
  int since_refactor = 0;
  double objective = 0.0;

  int cols() const { return n + m; }

  double nonbasic_value(int j) const {
    const bool lo_fin = std::isfinite(lo[j]);
    const bool hi_fin = std::isfinite(hi[j]);
    if (lo_fin && hi_fin) return at_upper[j] ? hi[j] : lo[j];
    if (lo_fin) return lo[j];
    if (hi_fin) return hi[j];
    return 0.0;
  }

  void place_nonbasic(int j) {
    if (std::isfinite(hi[j]) && !std::isfinite(lo[j])) at_upper[j] = 1;
    if (!std::isfinite(hi[j])) at_upper[j] = 0;
    x[j] = nonbasic_value(j);
  }

  void slack_basis() {
    const int N = cols();
    T.assign(m, std::vector<double>(N, 0.0));
    head.assign(m, 0);
    pos.assign(N, -1);
    for (int i = 0; i < m; ++i) {
      for (const Term& t : rows[i]) T[i][t.var] = -t.coef;
      T[i][n + i] = 1.0;
      head[i] = n + i;
      pos[n + i] = i;
    }
    for (int j = 0; j < N; ++j)
      if (pos[j] < 0) place_nonbasic(j);
    since_refactor = 0;
  }

  // Rebuilds T = B^{-1} [A | -I] for the current head. Falls back to the slack basis when the
  // basis matrix is numerically singular.
  void reinvert() {
    const int N = cols();
    std::vector<std::vector<double>> F(m, std::vector<double>(N, 0.0));
    for (int i = 0; i < m; ++i) {
      for (const Term& t : rows[i]) F[i][t.var] = t.coef;
      F[i][n + i] = -1.0;
    }
    std::vector<int> new_head(m, -1);
    std::vector<char> assigned(m, 0);
    for (int k = 0; k < m; ++k) {
      const int c = head[k];
      int best = -1;
      double best_abs = kSingularTol;
      for (int i = 0; i < m; ++i) {
        if (assigned[i]) continue;
        const double a = std::abs(F[i][c]);
        if (a > best_abs) {
          best_abs = a;
          best = i;
        }
      }
      if (best < 0) {
        slack_basis();
        return;
      }
      assigned[best] = 1;
      new_head[best] = c;
      const double inv = 1.0 / F[best][c];
      for (double& v : F[best]) v *= inv;
      F[best][c] = 1.0;
      for (int i = 0; i < m; ++i) {
        if (i == best) continue;
        const double f = F[i][c];
        if (f == 0.0) continue;
        for (int j = 0; j < N; ++j) F[i][j] -= f * F[best][j];
        F[i][c] = 0.0;
      }
    }
    T = std::move(F);
    head = std::move(new_head);
    pos.assign(N, -1);
    for (int i = 0; i < m; ++i) pos[head[i]] = i;
    since_refactor = 0;
  }

  void compute_basics() {
    const int N = cols();
    for (int j = 0; j < N; ++j)
      if (pos[j] < 0) x[j] = nonbasic_value(j);
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      const auto& row = T[i];
      for (int j = 0; j < N; ++j)
        if (pos[j] < 0 && row[j] != 0.0) acc -= row[j] * x[j];
      x[head[i]] = acc;
    }
  }

  void pivot(int r, int j) {
    const int N = cols();
    auto& pr = T[r];
    const double inv = 1.0 / pr[j];
    for (int k = 0; k < N; ++k) pr[k] *= inv;
    pr[j] = 1.0;
    for (int i = 0; i < m; ++i) {
      if (i == r) continue;
      const double f = T[i][j];
      if (f == 0.0) continue;
      auto& row = T[i];
      for (int k = 0; k < N; ++k)
        if (pr[k] != 0.0) row[k] -= f * pr[k];
      row[j] = 0.0;
    }
    pos[head[r]] = -1;
    head[r] = j;
    pos[j] = r;
    ++since_refactor;
  }

  double internal_objective() const {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += cost[j] * x[j];
    return acc;
  }

  Status run(std::int64_t max_iterations) {
    const int N0 = cols();
    if (max_iterations < 0) max_iterations = 20000 + 50 * static_cast<std::int64_t>(m + N0);
    if (since_refactor >= kRefactorEvery / 2) reinvert();
    compute_basics();

    struct Ratio {
      int row;
      double alpha, target, step;
    };
    std::vector<double> cb(m), d;
    std::vector<Ratio> ratios;
    int degenerate_run = 0;
    bool bland = false;
    bool fresh = true;  // basic values were just recomputed
    std::int64_t local = 0;

    while (true) {
      if (local++ > max_iterations) return Status::Failed;
      if (since_refactor >= kRefactorEvery) {
        reinvert();
        compute_basics();
        fresh = true;
      }
      const int N = cols();

      bool phase1 = false;
      for (int i = 0; i < m; ++i) {
        const int b = head[i];
        if (x[b] < lo[b] - feas_tol) {
          cb[i] = -1.0;
          phase1 = true;
        } else if (x[b] > hi[b] + feas_tol) {
          cb[i] = 1.0;
          phase1 = true;
        } else {
          cb[i] = 0.0;
        }
      }
      if (!phase1)
        for (int i = 0; i < m; ++i) cb[i] = head[i] < n ? cost[head[i]] : 0.0;

      // Pricing.
      d.assign(N, 0.0);
      for (int j = 0; j < N; ++j) {
        if (pos[j] >= 0) continue;
        double acc = (!phase1 && j < n) ? cost[j] : 0.0;
        for (int i = 0; i < m; ++i)
          if (cb[i] != 0.0) acc -= cb[i] * T[i][j];
        d[j] = acc;
      }
      int enter = -1;
      double best_score = 0.0;
      for (int j = 0; j < N; ++j) {
        if (pos[j] >= 0 || lo[j] == hi[j]) continue;
        const bool can_up = !std::isfinite(hi[j]) || x[j] < hi[j];
        const bool can_down = !std::isfinite(lo[j]) || x[j] > lo[j];
        const bool eligible = (d[j] < -kDualTol && can_up) || (d[j] > kDualTol && can_down);
        if (!eligible) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (std::abs(d[j]) > best_score) {
          best_score = std::abs(d[j]);
          enter = j;
        }
      }

      if (enter < 0) {
        // Conclude only from a freshly factored tableau; pivots accumulate error.
        if (since_refactor > 0) {
          reinvert();
          compute_basics();
          fresh = true;
          continue;
        }
        if (!fresh) {
          compute_basics();
          fresh = true;
          continue;
        }
        if (phase1) return Status::Infeasible;
        objective = internal_objective();
        return Status::Optimal;
      }

      // Two-pass ratio test: find the longest step that keeps every basic within its bound
      // relaxed by the feasibility tolerance, then leave on the largest pivot that blocks
      // within that step.
      const double s = d[enter] < 0.0 ? 1.0 : -1.0;
      const double range = (std::isfinite(lo[enter]) && std::isfinite(hi[enter]))
                               ? hi[enter] - lo[enter]
                               : kInf;
      ratios.clear();
      double t_relaxed = kInf;
      for (int i = 0; i < m; ++i) {
        const double alpha = -T[i][enter] * s;
        if (std::abs(alpha) < kPivotTol) continue;
        const int b = head[i];
        const double xv = x[b];
        double target;
        if (phase1 && xv < lo[b] - feas_tol) {
          if (alpha < 0.0) continue;
          target = lo[b];
        } else if (phase1 && xv > hi[b] + feas_tol) {
          if (alpha > 0.0) continue;
          target = hi[b];
        } else if (alpha > 0.0) {
          if (!std::isfinite(hi[b])) continue;
          target = hi[b];
        } else {
          if (!std::isfinite(lo[b])) continue;
          target = lo[b];
        }
        const double relax = alpha > 0.0 ? feas_tol : -feas_tol;
        t_relaxed = std::min(t_relaxed, std::max(0.0, (target + relax - xv) / alpha));
        ratios.push_back({i, alpha, target, std::max(0.0, (target - xv) / alpha)});
      }

      double t_best = kInf;
      int leave = -1;
      double leave_alpha = 0.0;
      double leave_target = 0.0;
      for (const Ratio& r : ratios) {
        if (r.step > t_relaxed) continue;
        bool take = leave < 0;
        if (!take) {
          take = bland ? head[r.row] < head[leave]
                       : std::abs(r.alpha) > std::abs(leave_alpha);
        }
        if (take) {
          t_best = r.step;
          leave = r.row;
          leave_alpha = r.alpha;
          leave_target = r.target;
        }
      }
      // A bound flip of the entering column wins when it is no longer than any blocking step.
      if (range <= t_best) {
        t_best = range;
        leave = -1;
      }

      if (!std::isfinite(t_best)) {
        if (phase1) return Status::Failed;
        return Status::Unbounded;
      }

      ++iterations;
      if (t_best <= 1e-12) {
        if (++degenerate_run > kBlandAfter) bland = true;
      } else {
        degenerate_run = 0;
      }

      for (int i = 0; i < m; ++i) {
        const double a = T[i][enter];
        if (a != 0.0) x[head[i]] -= a * s * t_best;
      }
      x[enter] += s * t_best;
      fresh = false;

      if (leave < 0) {
        at_upper[enter] = s > 0.0 ? 1 : 0;
        x[enter] = nonbasic_value(enter);
        continue;
      }
      const int b = head[leave];
      pivot(leave, enter);
      at_upper[b] = (leave_target == hi[b] && leave_target != lo[b]) ? 1 : 0;
      x[b] = leave_target;
    }
  }
};

LpEngine::LpEngine(const MipModel& model, double feasibility_tolerance)
    : impl_(std::make_unique<Impl>()) {
  Impl& s = *impl_;
  s.feas_tol = feasibility_tolerance;
  s.n = static_cast<int>(model.num_variables());
  s.m = 0;
  for (const Variable& v : model.variables()) {
    s.lo.push_back(v.lo);
    s.hi.push_back(v.hi);
  }
  s.cost.assign(s.n, 0.0);
  s.at_upper.assign(s.n, 0);
  s.x.assign(s.n, 0.0);
  for (const Constraint& c : model.constraints()) {
    double rlo = -kInf, rhi = kInf;
    if (c.sense != Sense::LessEqual) rlo = c.rhs;
    if (c.sense != Sense::GreaterEqual) rhi = c.rhs;
    s.rows.push_back(c.terms);
    s.lo.push_back(rlo);
    s.hi.push_back(rhi);
    s.at_upper.push_back(0);
    s.x.push_back(0.0);
    ++s.m;
  }
  s.slack_basis();
  set_objective(model.objective().sense, model.objective().terms);
}

LpEngine::~LpEngine() = default;
LpEngine::LpEngine(LpEngine&&) noexcept = default;
LpEngine& LpEngine::operator=(LpEngine&&) noexcept = default;

void LpEngine::set_objective(ObjSense sense, std::span<const Term> terms) {
  Impl& s = *impl_;
  s.maximize = sense == ObjSense::Maximize;
  std::fill(s.cost.begin(), s.cost.end(), 0.0);
  for (const Term& t : terms) {
    if (t.var < 0 || t.var >= s.n) throw ModelError("objective references unknown variable");
    s.cost[t.var] += s.maximize ? -t.coef : t.coef;
  }
}

void LpEngine::set_bounds(VarId v, double lo, double hi) {
  Impl& s = *impl_;
  if (v < 0 || v >= s.n) throw ModelError("unknown variable id " + std::to_string(v));
  s.lo[v] = lo;
  s.hi[v] = hi;
  if (s.pos[v] < 0) s.place_nonbasic(v);
}

double LpEngine::lower(VarId v) const { return impl_->lo.at(v); }
double LpEngine::upper(VarId v) const { return impl_->hi.at(v); }

void LpEngine::add_row(std::span<const Term> terms, Sense sense, double rhs) {
  Impl& s = *impl_;
  const int old_cols = s.cols();
  // New logical column appended at the end; structural indices stay fixed.
  for (auto& row : s.T) row.push_back(0.0);
  double rlo = -kInf, rhi = kInf;
  if (sense != Sense::LessEqual) rlo = rhs;
  if (sense != Sense::GreaterEqual) rhi = rhs;
  s.lo.push_back(rlo);
  s.hi.push_back(rhi);
  s.at_upper.push_back(0);
  s.x.push_back(0.0);
  s.pos.push_back(-1);
  const int logical = old_cols;

  // Express -a x + r = 0 in terms of nonbasics by eliminating current basics.
  std::vector<double> row(old_cols + 1, 0.0);
  std::vector<Term> stored;
  for (const Term& t : terms) {
    if (t.var < 0 || t.var >= s.n) throw ModelError("cut references unknown variable");
    row[t.var] -= t.coef;
    stored.push_back(t);
  }
  row[logical] = 1.0;
  for (int i = 0; i < s.m; ++i) {
    const double a = row[s.head[i]];
    if (a == 0.0) continue;
    const auto& ti = s.T[i];
    for (int j = 0; j < old_cols; ++j)
      if (ti[j] != 0.0) row[j] -= a * ti[j];
    row[s.head[i]] = 0.0;
  }
  s.rows.push_back(std::move(stored));
  s.T.push_back(std::move(row));
  s.head.push_back(logical);
  s.pos[logical] = s.m;
  ++s.m;
  // Logical columns are indexed n + i, which matches `logical` since rows are appended last.
}

LpEngine::Status LpEngine::solve(std::int64_t max_iterations) {
  const Status st = impl_->run(max_iterations);
  if (st == Status::Optimal && impl_->maximize) impl_->objective = -impl_->objective;
  return st;
}

double LpEngine::objective_value() const { return impl_->objective; }

std::vector<double> LpEngine::values() const {
  return {impl_->x.begin(), impl_->x.begin() + impl_->n};
}

std::int64_t LpEngine::iterations() const { return impl_->iterations; }
std::size_t LpEngine::num_rows() const { return static_cast<std::size_t>(impl_->m); }

LpEngine::Basis LpEngine::basis() const { return {impl_->head, impl_->at_upper}; }

void LpEngine::set_basis(const Basis& b) {
  Impl& s = *impl_;
  const int N = s.cols();
  if (b.basic.size() > static_cast<std::size_t>(s.m) || b.at_upper.size() > static_cast<std::size_t>(N))
    throw ModelError("basis does not fit the LP");
  std::vector<int> head = b.basic;
  // Rows added after the basis was saved keep their logical basic.
  for (int i = static_cast<int>(b.basic.size()); i < s.m; ++i) head.push_back(s.n + i);
  for (std::size_t j = 0; j < b.at_upper.size(); ++j) s.at_upper[j] = b.at_upper[j];

  std::vector<int> a = head, c = s.head;
  std::sort(a.begin(), a.end());
  std::sort(c.begin(), c.end());
  if (a != c) {
    s.head = std::move(head);
    s.pos.assign(N, -1);
    for (int i = 0; i < s.m; ++i) s.pos[s.head[i]] = i;
    s.reinvert();
  }
  for (int j = 0; j < N; ++j)
    if (s.pos[j] < 0) s.place_nonbasic(j);
}

}  // namespace relumip
