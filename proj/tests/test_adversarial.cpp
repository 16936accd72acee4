#include <cmath>

#include "doctest.h"
#include "relumip/adversarial.hpp"
#include "relumip/errors.hpp"
#include "relumip/fixtures.hpp"
#include "relumip/pattern_oracle.hpp"
#include "test_util.hpp"

using namespace relumip;

namespace {

// Two inputs in [0, 1]; an identity ReLU layer, then logits equal to the inputs.
Network identity_net() {
  return Network(2, {{0, 1}, {0, 1}},
                 {tu::dense({{1, 0}, {0, 1}}, {0, 0}), tu::dense({{1, 0}, {0, 1}}, {0, 0}, Activation::Linear)});
}

OracleProblem attack_problem(const Network& net, const AttackSpec& spec) {
  OracleProblem p;
  p.sense = ObjSense::Minimize;
  p.l1_reference = spec.reference;
  const std::size_t classes = layer_outputs(net.layer(net.num_layers()));
  const std::size_t t = spec.target_class();
  for (std::size_t j = 0; j < classes; ++j) {
    if (j == t) continue;
    OracleProblem::Row r;
    r.output.assign(classes, 0.0);
    r.output[t] = 1.0;
    r.output[j] = -spec.margin;
    r.sense = Sense::GreaterEqual;
    p.rows.push_back(r);
  }
  return p;
}

std::vector<FormulationSpec> formulations() {
  std::vector<FormulationSpec> out;
  FormulationSpec s;
  out.push_back(s);
  s.bound_method = BoundMethod::Cheng;
  out.push_back(s);
  s = {};
  s.relu = ReluFormulation::Extended;
  out.push_back(s);
  s.valid_inequalities = true;
  out.push_back(s);
  s = {};
  s.relu = ReluFormulation::Disjunctive;
  out.push_back(s);
  s = {};
  s.relu = ReluFormulation::BigMHullCuts;
  out.push_back(s);
  return out;
}

}  // namespace

TEST_CASE("default target class") {
  CHECK(default_target(4) == 9);
  CHECK(default_target(6) == 1);
  CHECK(default_target(0) == 5);
  AttackSpec s;
  s.true_class = 7;
  CHECK(s.target_class() == 2);
  s.target = 3;
  CHECK(s.target_class() == 3);
}

TEST_CASE("closest point past a single margin row") {
  // Move (0.8, 0.2) until x1 >= 1.2 x0; cheapest is lowering x0 to 0.2 / 1.2.
  const Network net = identity_net();
  AttackSpec spec;
  spec.reference = {0.8, 0.2};
  spec.true_class = 0;
  spec.target = 1;
  const AttackRun run = run_attack(net, spec, {});
  REQUIRE(run.result.status == SolveStatus::Optimal);
  CHECK(run.result.objective == doctest::Approx(0.8 - 0.2 / 1.2).epsilon(1e-9));
  CHECK(run.perturbed[0] == doctest::Approx(0.2 / 1.2).epsilon(1e-9));
  CHECK(run.perturbed[1] == doctest::Approx(0.2).epsilon(1e-9));
  REQUIRE(run.report);
  CHECK(run.report->margin_ok);
  CHECK(run.report->predicted == 1);
}

TEST_CASE("a reference already past the margin needs no change") {
  const Network net = identity_net();
  AttackSpec spec;
  spec.reference = {0.1, 0.9};
  spec.true_class = 0;
  spec.target = 1;
  const AttackRun run = run_attack(net, spec, {});
  REQUIRE(run.result.status == SolveStatus::Optimal);
  CHECK(std::abs(run.result.objective) <= 1e-9);
  CHECK(run.perturbed[0] == doctest::Approx(0.1));
  CHECK(run.perturbed[1] == doctest::Approx(0.9));
}

TEST_CASE("verification rejects the reference itself") {
  for (const AttackFixture& f : small_attack_fixtures()) {
    const AttackReport r = verify_attack(f.net, f.spec, f.spec.reference);
    CHECK_FALSE(r.margin_ok);
    CHECK(r.in_box);
    CHECK(r.l1 == 0.0);
    CHECK(r.predicted == f.spec.true_class);
  }
}

TEST_CASE("small fixtures: verified attacks whose L1 equals the objective") {
  for (const AttackFixture& f : small_attack_fixtures()) {
    const AttackRun run = run_attack(f.net, f.spec, {});
    REQUIRE(run.result.status == SolveStatus::Optimal);
    REQUIRE(run.report);
    CHECK(run.report->margin_ok);
    CHECK(run.report->in_box);
    CHECK(run.report->target == f.spec.target_class());
    CHECK(run.report->l1 == doctest::Approx(run.result.objective).epsilon(1e-6));
    CHECK(run.encoding.model.max_violation(run.result.incumbent) <= 1e-6);
  }
}

TEST_CASE("attack optimum matches the pattern oracle in every formulation") {
  for (const AttackFixture& f : small_attack_fixtures()) {
    const OracleResult o = pattern_oracle(f.net, attack_problem(f.net, f.spec));
    REQUIRE(o.feasible);
    for (const FormulationSpec& fs : formulations()) {
      const AttackRun run = run_attack(f.net, f.spec, fs);
      INFO(formulation_name(fs.relu) << " vi=" << fs.valid_inequalities);
      REQUIRE(run.result.status == SolveStatus::Optimal);
      CHECK(std::abs(run.result.objective - o.optimum) <= 1e-6 * std::max(1.0, o.optimum));
    }
  }
}

TEST_CASE("attack rows and distance variables are named") {
  const AttackFixture f = small_attack_fixture(kSmallNetSeeds[0]);
  const AttackRun run = run_attack(f.net, f.spec, {});
  const MipModel& m = run.encoding.model;
  const std::size_t t = f.spec.target_class();
  for (std::size_t j = 0; j < 3; ++j) CHECK(bool(m.find_constraint("margin_c" + std::to_string(j))) == (j != t));
  for (std::size_t j = 0; j < 4; ++j) {
    const auto d = m.find_variable("d_n" + std::to_string(j));
    REQUIRE(d);
    CHECK(m.variable(*d).meta->role == VarRole::Distance);
    CHECK(m.find_constraint("dist_pos_n" + std::to_string(j)));
    CHECK(m.find_constraint("dist_neg_n" + std::to_string(j)));
  }
  CHECK(m.objective().sense == ObjSense::Minimize);
}

TEST_CASE("attack spec validation") {
  const AttackFixture f = small_attack_fixture(kSmallNetSeeds[0]);
  AttackSpec s = f.spec;
  s.margin = 1.0;
  CHECK_THROWS_AS(s.validate(f.net), ModelError);
  s = f.spec;
  s.target = s.true_class;
  CHECK_THROWS_AS(s.validate(f.net), ModelError);
  s = f.spec;
  s.target = 3;
  CHECK_THROWS_AS(s.validate(f.net), ModelError);
  s = f.spec;
  s.target.reset();  // default target 5+ does not exist among 3 classes
  CHECK_THROWS_AS(s.validate(f.net), ModelError);
  s = f.spec;
  s.reference.pop_back();
  CHECK_THROWS_AS(s.validate(f.net), DimensionError);
  s = f.spec;
  s.reference[0] = 2.0;
  CHECK_THROWS_AS(s.validate(f.net), ModelError);
  s = f.spec;
  s.logits_layer = 1;
  CHECK_NOTHROW(s.validate(f.net));
  s.logits_layer = 9;
  CHECK_THROWS_AS(s.validate(f.net), ModelError);
}

TEST_CASE("attack on an intermediate logits layer") {
  const AttackFixture f = small_attack_fixture(kSmallNetSeeds[1]);
  AttackSpec s = f.spec;
  s.logits_layer = 2;
  const auto hidden = forward(f.net, s.reference).post[2];
  s.true_class = argmax(hidden);
  s.target = s.true_class == 0 ? 1 : 0;
  const AttackRun run = run_attack(f.net, s, {});
  CHECK(run.encoding.outputs.size() == 3);
  if (run.result.status == SolveStatus::Optimal) {
    REQUIRE(run.report);
    CHECK(run.report->margin_ok);
    CHECK(run.report->logits.size() == 5);
  } else {
    CHECK(run.result.status == SolveStatus::Infeasible);
  }
}

TEST_CASE("attack spec documents") {
  const AttackSpec s = parse_attack_spec(R"({"reference": [0.5, 0.25], "true_class": 4, "margin": 1.5})");
  CHECK(s.reference == std::vector<double>{0.5, 0.25});
  CHECK(s.true_class == 4);
  CHECK_FALSE(s.target);
  CHECK(s.target_class() == 9);
  CHECK(s.margin == 1.5);
  const AttackSpec t = parse_attack_spec(R"({"reference": [0], "true_class": 1, "target": 0, "logits_layer": 2})");
  CHECK(*t.target == 0);
  CHECK(*t.logits_layer == 2);
  CHECK(t.margin == 1.2);
  CHECK_THROWS_AS(parse_attack_spec("[]"), ParseError);
  CHECK_THROWS_AS(parse_attack_spec(R"({"true_class": 1})"), ParseError);
  CHECK_THROWS_AS(parse_attack_spec("{"), ParseError);
  CHECK_THROWS_AS(load_attack_spec("/nonexistent/attack.json"), IoError);
}

TEST_CASE("report documents carry the perturbed input") {
  const Network net = identity_net();
  AttackSpec spec;
  spec.reference = {0.8, 0.2};
  spec.true_class = 0;
  spec.target = 1;
  const AttackRun run = run_attack(net, spec, {});
  const std::string doc = attack_report_to_string(*run.report, run.perturbed);
  CHECK(doc.find("\"margin_ok\"") != std::string::npos);
  CHECK(doc.find("\"input\"") != std::string::npos);
  CHECK(doc.find("\"target\"") != std::string::npos);
}
