#include <cmath>
#include <random>

#include "doctest.h"
#include "relumip/encodings.hpp"
#include "relumip/errors.hpp"
#include "relumip/pattern_oracle.hpp"
#include "relumip/solver.hpp"
#include "test_util.hpp"

using namespace relumip;

namespace {

MipModel knapsack(int items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MipModel m("knap");
  std::vector<Term> row, obj;
  for (int i = 0; i < items; ++i) {
    const VarId v = m.add_binary("b" + std::to_string(i));
    row.push_back({v, 1.0 + std::floor(9 * uniform01(rng))});
    obj.push_back({v, 1.0 + std::floor(9 * uniform01(rng))});
  }
  m.add_constraint("cap", row, Sense::LessEqual, 2.0 * items);
  m.set_objective(ObjSense::Maximize, obj);
  return m;
}

double knapsack_brute_force(const MipModel& m) {
  const std::size_t n = m.num_variables();
  double best = -kInf;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = (mask >> j) & 1;
    if (m.max_violation(x) <= 1e-9) best = std::max(best, m.evaluate_objective(x));
  }
  return best;
}

}  // namespace

TEST_CASE("LP: single bounded variable") {
  MipModel m;
  const VarId x = m.add_continuous("x", 0, 10);
  m.add_constraint("c", {{x, 1}}, Sense::GreaterEqual, 1);
  m.set_objective(ObjSense::Minimize, {{x, 1}});
  const SolveResult r = solve_lp(m);
  CHECK(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.0));
}

TEST_CASE("LP: two variables sharing a budget") {
  MipModel m;
  const VarId x = m.add_continuous("x", 0, 1), y = m.add_continuous("y", 0, 1);
  m.add_constraint("c", {{x, 1}, {y, 1}}, Sense::LessEqual, 1);
  m.set_objective(ObjSense::Minimize, {{x, -1}, {y, -1}});
  CHECK(solve_lp(m).objective == doctest::Approx(-1.0));
}

TEST_CASE("infeasible and unbounded models") {
  MipModel m;
  const VarId x = m.add_continuous("x", -kInf, kInf);
  m.add_constraint("lo", {{x, 1}}, Sense::GreaterEqual, 2);
  m.add_constraint("hi", {{x, 1}}, Sense::LessEqual, 1);
  CHECK(solve_lp(m).status == SolveStatus::Infeasible);
  CHECK(solve_mip(m).status == SolveStatus::Infeasible);

  MipModel u;
  const VarId y = u.add_continuous("y", 0, kInf);
  u.set_objective(ObjSense::Maximize, {{y, 1}});
  CHECK(solve_lp(u).status == SolveStatus::Unbounded);
}

TEST_CASE("binary knapsack closes in at most 3 nodes") {
  MipModel m;
  const VarId a = m.add_binary("a"), b = m.add_binary("b");
  m.add_constraint("c", {{a, 1}, {b, 1}}, Sense::LessEqual, 1);
  m.set_objective(ObjSense::Maximize, {{a, 3}, {b, 2}});
  const SolveResult r = solve_mip(m);
  CHECK(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(3.0));
  CHECK(r.nodes <= 3);
}

TEST_CASE("random knapsacks match brute force") {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const MipModel m = knapsack(10, s);
    const SolveResult r = solve_mip(m);
    CHECK(r.status == SolveStatus::Optimal);
    CHECK(r.objective == doctest::Approx(knapsack_brute_force(m)).epsilon(1e-9));
    CHECK(r.gap <= 1e-6);
    CHECK(r.bound >= r.objective - 1e-9);  // maximize: bound above
    CHECK(m.max_violation(r.incumbent) <= 1e-6);
  }
}

TEST_CASE("general integers branch to the right optimum") {
  MipModel m;
  const VarId x = m.add_variable("x", VarKind::Integer, 0, 10), y = m.add_variable("y", VarKind::Integer, 0, 10);
  m.add_constraint("a", {{x, 2}, {y, 2}}, Sense::LessEqual, 9);
  m.add_constraint("b", {{x, 1}, {y, -1}}, Sense::LessEqual, 0.5);
  m.set_objective(ObjSense::Maximize, {{x, 1}, {y, 1.5}});
  const SolveResult r = solve_mip(m);
  CHECK(r.status == SolveStatus::Optimal);
  // Enumerated by hand: x + y <= 4 and x <= y, best is (0, 4) with 6.
  CHECK(r.objective == doctest::Approx(6.0));
}

TEST_CASE("node limit gives a limit status") {
  const MipModel m = knapsack(16, 3);
  SolverParams p;
  p.node_limit = 1;
  const SolveResult r = solve_mip(m, p);
  CHECK((r.status == SolveStatus::Feasible || r.status == SolveStatus::LimitNoIncumbent ||
         r.status == SolveStatus::Optimal));
  if (r.status == SolveStatus::Feasible) CHECK(r.gap > 0);
  p.node_limit = 0;
  CHECK(solve_mip(m, p).status == SolveStatus::LimitNoIncumbent);
}

TEST_CASE("solves are deterministic") {
  const MipModel m = knapsack(14, 9);
  const SolveResult a = solve_mip(m), b = solve_mip(m);
  CHECK(solve_result_to_string(a, &m, true) == solve_result_to_string(b, &m, true));
  CHECK(a.nodes == b.nodes);
}

TEST_CASE("parameter validation") {
  SolverParams p;
  p.gap_tolerance = 0;
  CHECK_THROWS_AS(p.validate(), ModelError);
  p = {};
  p.node_limit = -1;
  CHECK_THROWS_AS(p.validate(), ModelError);
}

TEST_CASE("gap formula") {
  CHECK(relative_gap(10, 9) == doctest::Approx(0.1));
  CHECK(relative_gap(5, 0) == doctest::Approx(1.0));
  CHECK(relative_gap(0, 0) == 0.0);
}

TEST_CASE("warm-started LP engine agrees with a fresh solve") {
  const MipModel m = knapsack(12, 4);
  LpEngine lp(m);
  REQUIRE(lp.solve() == LpEngine::Status::Optimal);
  std::mt19937_64 rng(2);
  for (int round = 0; round < 20; ++round) {
    const VarId v = VarId(rng() % m.num_variables());
    const double val = double(rng() % 2);
    lp.set_bounds(v, val, val);
    MipModel fresh = m;
    for (VarId j = 0; j < VarId(m.num_variables()); ++j) fresh.set_bounds(j, lp.lower(j), lp.upper(j));
    const SolveResult f = solve_lp(fresh);
    const LpEngine::Status st = lp.solve();
    if (f.status == SolveStatus::Optimal) {
      REQUIRE(st == LpEngine::Status::Optimal);
      CHECK(lp.objective_value() == doctest::Approx(f.objective).epsilon(1e-9));
    } else {
      CHECK(st == LpEngine::Status::Infeasible);
    }
  }
}

TEST_CASE("a cut separator tightens the root") {
  // max x + y over x, y binary with 2x + 2y <= 3. The LP root is 1.5; the cut x + y <= 1 closes it.
  struct Separator : CutSeparator {
    int calls = 0;
    std::vector<Cut> separate(std::span<const double> x) override {
      ++calls;
      if (x[0] + x[1] > 1 + 1e-9) return {Cut{{{0, 1.0}, {1, 1.0}}, Sense::LessEqual, 1.0}};
      return {};
    }
  };
  MipModel m;
  const VarId x = m.add_binary("x"), y = m.add_binary("y");
  m.add_constraint("c", {{x, 2}, {y, 2}}, Sense::LessEqual, 3);
  m.set_objective(ObjSense::Maximize, {{x, 1}, {y, 1}});
  Separator sep;
  const SolveResult r = solve_mip(m, {}, &sep);
  CHECK(r.objective == doctest::Approx(1.0));
  CHECK(r.cuts == 1);
  CHECK(r.nodes == 1);
  CHECK(*r.lp_relaxation == doctest::Approx(1.5));
}

TEST_CASE("result documents round-trip") {
  const MipModel m = knapsack(6, 1);
  SolveResult r = solve_mip(m);
  r.label = "demo";
  const SolveResult back = solve_result_from_json(solve_result_to_json(r));
  CHECK(back.status == r.status);
  CHECK(back.objective == r.objective);
  CHECK(back.incumbent == r.incumbent);
  CHECK(back.label == "demo");
  CHECK(solve_result_to_json(r, &m, true).contains("time") == false);
  CHECK(solve_result_to_json(r, &m, false).contains("time"));
  SolveResult inf;
  inf.status = SolveStatus::Infeasible;
  const SolveResult inf_back = solve_result_from_json(solve_result_to_json(inf));
  CHECK(std::isnan(inf_back.objective));
  CHECK(parse_status("Feasible") == SolveStatus::Feasible);
}

TEST_CASE("pattern oracle enumerates one LP per pattern") {
  // One unstable unit (x - 0.5 over [0, 1]) and one stable unit.
  const Network one(1, {{0, 1}}, {tu::dense({{1, 1}}, {-0.5, 2}), tu::dense({{1}, {1}}, {0}, Activation::Linear)});
  OracleProblem p;
  p.sense = ObjSense::Maximize;
  p.output_coef = {1};
  const OracleResult r = pattern_oracle(one, p);
  CHECK(r.patterns == 2);
  CHECK(r.optimum == doctest::Approx(3.5));

  const Network stable(1, {{0, 1}}, {tu::dense({{1, 1}}, {1, 2}), tu::dense({{1}, {-1}}, {0}, Activation::Linear)});
  CHECK(pattern_oracle(stable, p).patterns == 1);

  std::vector<std::vector<double>> w(1, std::vector<double>(21, 1.0));
  const Network wide(1, {{-1, 1}}, {tu::dense(w, std::vector<double>(21, 0.0))});
  CHECK_THROWS_AS(pattern_oracle(wide, p), ModelError);
}

TEST_CASE("branch and bound agrees with the pattern oracle on random 4-5-3 nets") {
  std::mt19937_64 rng(8);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Network net = tu::random_net(700 + s, {4, 5, 3});
    OracleProblem p;
    p.sense = s % 2 ? ObjSense::Maximize : ObjSense::Minimize;
    for (int i = 0; i < 3; ++i) p.output_coef.push_back(2 * uniform01(rng) - 1);
    const OracleResult o = pattern_oracle(net, p);
    REQUIRE(o.feasible);
    Encoding enc = encode_network(net, bounds_interval_bunel(net), {});
    std::vector<Term> obj;
    for (int i = 0; i < 3; ++i) obj.push_back({enc.outputs[2][i], p.output_coef[i]});
    enc.model.set_objective(p.sense, obj);
    const SolveResult r = solve_mip(enc.model);
    CHECK(r.status == SolveStatus::Optimal);
    CHECK(std::abs(r.objective - o.optimum) <= 1e-6 * std::max(1.0, std::abs(o.optimum)));
  }
}

TEST_CASE("fixed inputs make the encoded net evaluate its forward pass") {
  std::mt19937_64 rng(21);
  const Network net = tu::random_net(800, {4, 5, 5, 3});
  for (int k = 0; k < 5; ++k) {
    const std::vector<double> x = tu::sample(rng, net);
    Encoding enc = encode_network(net, bounds_interval_bunel(net), {});
    for (std::size_t j = 0; j < 4; ++j) enc.model.set_bounds(enc.outputs[0][j], x[j], x[j]);
    enc.model.set_objective(ObjSense::Maximize, {{enc.outputs[3][1], 1.0}});
    const SolveResult r = solve_mip(enc.model);
    CHECK(r.status == SolveStatus::Optimal);
    CHECK(r.objective == doctest::Approx(forward(net, x).output()[1]).epsilon(1e-7));
  }
}

TEST_CASE("restoring saved bases on a network model agrees with fresh solves") {
  // Branching-like sequence: fix indicators, re-solve from an earlier basis.
  for (std::uint64_t seed : {64u, 65u, 66u}) {
    const Network net = tu::random_net(seed, {4, 5, 4, 3});
    FormulationSpec s;
    s.relu = ReluFormulation::Disjunctive;
    s.partitions = 2;
    Encoding enc = encode_network(net, bounds_interval_bunel(net), s);
    enc.model.set_objective(ObjSense::Minimize, {{enc.outputs[3][0], 1.0}, {enc.outputs[3][2], -0.7}});
    std::vector<VarId> ints;
    for (VarId j = 0; j < VarId(enc.model.num_variables()); ++j)
      if (enc.model.variables()[j].is_integer()) ints.push_back(j);
    LpEngine lp(enc.model);
    REQUIRE(lp.solve() == LpEngine::Status::Optimal);
    const LpEngine::Basis root = lp.basis();
    std::mt19937_64 rng(seed);
    for (int round = 0; round < 40; ++round) {
      for (VarId v : ints) lp.set_bounds(v, 0, 1);
      for (int k = 0; k < 3; ++k) {
        const VarId v = ints[rng() % ints.size()];
        const double val = double(rng() % 2);
        lp.set_bounds(v, val, val);
      }
      if (round % 2) lp.set_basis(root);
      MipModel fresh = enc.model;
      for (VarId v : ints) fresh.set_bounds(v, lp.lower(v), lp.upper(v));
      const SolveResult f = solve_lp(fresh);
      const LpEngine::Status st = lp.solve();
      if (f.status == SolveStatus::Optimal) {
        REQUIRE(st == LpEngine::Status::Optimal);
        CHECK(lp.objective_value() == doctest::Approx(f.objective).epsilon(1e-8));
      } else {
        CHECK(st == LpEngine::Status::Infeasible);
      }
    }
  }
}
