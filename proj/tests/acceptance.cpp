// Acceptance suite: one PASS/FAIL line per primary criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "relumip/adversarial.hpp"
#include "relumip/bounds.hpp"
#include "relumip/encodings.hpp"
#include "relumip/fixtures.hpp"
#include "relumip/pattern_oracle.hpp"
#include "relumip/training.hpp"
#include "test_util.hpp"

using namespace relumip;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), since(t0));
  std::fflush(stdout);
}

template <typename... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
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

Encoding attack_model(const Network& net, const AttackSpec& spec, const FormulationSpec& fs) {
  return build_attack(encode_network(net, compute_bounds(net, fs.bound_method), fs, spec.logits(net)), net, spec);
}

Encoding objective_model(const Network& net, const std::vector<double>& coef, const FormulationSpec& fs) {
  Encoding enc = encode_network(net, compute_bounds(net, fs.bound_method), fs);
  std::vector<Term> obj;
  for (std::size_t i = 0; i < coef.size(); ++i) obj.push_back({enc.outputs.back()[i], coef[i]});
  enc.model.set_objective(ObjSense::Maximize, obj);
  return enc;
}

std::vector<double> random_objective(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> c(3);
  for (double& v : c) v = 2.0 * uniform01(rng) - 1.0;
  return c;
}

struct Named {
  std::string name;
  FormulationSpec spec;
};

std::vector<Named> agreement_formulations() {
  std::vector<Named> v;
  FormulationSpec s;
  v.push_back({"bigm/bunel", s});
  s.bound_method = BoundMethod::Cheng;
  v.push_back({"bigm/cheng", s});
  s = {};
  s.relu = ReluFormulation::Extended;
  v.push_back({"extended", s});
  s.valid_inequalities = true;
  v.push_back({"extended+vi", s});
  s = {};
  s.relu = ReluFormulation::Disjunctive;
  v.push_back({"disjunctive/k1", s});
  return v;
}

std::vector<Named> all_formulations() {
  std::vector<Named> v = agreement_formulations();
  FormulationSpec s;
  s.bound_method = BoundMethod::Tjeng;
  v.push_back({"bigm/tjeng", s});
  s = {};
  s.relu = ReluFormulation::Extended;
  s.bound_method = BoundMethod::Serra;
  v.push_back({"extended/serra", s});
  s = {};
  s.relu = ReluFormulation::Disjunctive;
  s.partitions = 2;
  v.push_back({"disjunctive/k2", s});
  s.partition_bounds = PartitionBounds::Lp;
  v.push_back({"disjunctive/k2/lp", s});
  s = {};
  s.relu = ReluFormulation::BigMHullCuts;
  v.push_back({"hullcuts", s});
  return v;
}

std::vector<Network> fuzz_nets() {
  std::vector<Network> nets;
  for (std::uint64_t k = 0; k < 20; ++k) nets.push_back(tu::random_net(kFuzzNetSeed + k, {4, 5, 5, 3}));
  return nets;
}

TrainingSpec xor_spec(TrainingVariant v) {
  TrainingSpec s;
  s.arch = {2, 2, 1};
  s.data = xor4();
  s.variant = v;
  // Binarized L1 cannot reach 0 on XOR with P = 1 (outputs move in steps of 2/3); hinge can.
  s.loss = v == TrainingVariant::Binarized ? Loss::Hinge : Loss::L1;
  return s;
}

// ---- criteria ----

Outcome cross_formulation() {
  const auto t0 = Clock::now();
  int checks = 0;
  double worst = 0.0;
  std::string first_bad;
  const auto fixtures = small_attack_fixtures();
  for (std::size_t k = 0; k < fixtures.size(); ++k) {
    const AttackFixture& f = fixtures[k];
    const std::vector<double> coef = random_objective(kSmallNetSeeds[k]);
    OracleProblem linear;
    linear.sense = ObjSense::Maximize;
    linear.output_coef = coef;
    const double o_lin = pattern_oracle(f.net, linear).optimum;
    const OracleResult o_att = pattern_oracle(f.net, attack_problem(f.net, f.spec));
    for (const Named& n : agreement_formulations()) {
      for (int kind = 0; kind < 2; ++kind) {
        const Encoding enc = kind == 0 ? objective_model(f.net, coef, n.spec) : attack_model(f.net, f.spec, n.spec);
        const SolveResult r = solve_encoding(enc);
        const double want = kind == 0 ? o_lin : o_att.optimum;
        const double diff = r.status == SolveStatus::Optimal ? std::abs(r.objective - want) : kInf;
        worst = std::max(worst, diff);
        if (diff > 1e-6 && first_bad.empty())
          first_bad = n.name + (kind == 0 ? " linear" : " attack") + " " + status_name(r.status);
        ++checks;
      }
    }
  }
  const double t = since(t0);
  const bool ok = first_bad.empty() && t < 120.0;
  return {ok, fmt("%d solves, max |diff| vs pattern oracle %.2e, %.1f s of 120%s%s", checks, worst, t,
                  first_bad.empty() ? "" : ", first mismatch: ", first_bad.c_str())};
}

Outcome lp_relaxation_zero() {
  std::vector<AttackFixture> all = small_attack_fixtures();
  all.push_back(large_attack_fixture());
  int bad = 0;
  std::string which;
  double worst = 0.0;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const Encoding enc = attack_model(all[k].net, all[k].spec, {});
    const SolveResult lp = solve_lp(enc.model);
    const double v = lp.status == SolveStatus::Optimal ? std::abs(lp.objective) : kInf;
    worst = std::max(worst, v);
    if (v > 1e-9) {
      ++bad;
      which += fmt(" %s=%.6g", k < std::size(kSmallNetSeeds) ? std::to_string(kSmallNetSeeds[k]).c_str() : "large",
                   lp.status == SolveStatus::Optimal ? lp.objective : NAN);
    }
  }
  return {bad == 0, fmt("%zu attack models, %d with a nonzero LP relaxation (max %.6g)%s", all.size(), bad, worst,
                        which.c_str())};
}

Outcome bound_fuzz() {
  std::mt19937_64 rng(kFuzzNetSeed);
  std::size_t violations = 0, checks = 0;
  for (const Network& net : fuzz_nets()) {
    std::vector<BoundSet> sets;
    for (BoundMethod m : {BoundMethod::Bunel, BoundMethod::Cheng, BoundMethod::Tjeng, BoundMethod::Serra})
      sets.push_back(compute_bounds(net, m));
    for (int s = 0; s < 1000; ++s) {
      const Activations a = forward(net, tu::sample(rng, net));
      for (const BoundSet& b : sets)
        for (std::size_t l = 1; l <= net.num_layers(); ++l)
          for (std::size_t i = 0; i < a.post[l].size(); ++i) {
            const NeuronBounds& nb = b.at(l, i);
            ++checks;
            if (!nb.pre.contains(a.pre[l][i], 1e-9) || !nb.post.contains(a.post[l][i], 1e-9)) ++violations;
          }
    }
  }
  return {violations == 0, fmt("%zu neuron checks over 20 nets x 1000 inputs x 4 methods, %zu violations", checks,
                               violations)};
}

Outcome tightening() {
  std::vector<Network> nets = fuzz_nets();
  for (const AttackFixture& f : small_attack_fixtures()) nets.push_back(f.net);
  nets.push_back(large_attack_fixture().net);
  std::size_t not_contained = 0, units = 0;
  for (const Network& net : nets) {
    const BoundSet bun = bounds_interval_bunel(net);
    const BoundSet tj = bounds_lp_tjeng(net, bun);
    for (std::size_t l = 1; l <= net.num_layers(); ++l)
      for (std::size_t i = 0; i < bun.layers[l - 1].size(); ++i) {
        ++units;
        const Interval a = tj.at(l, i).pre, b = bun.at(l, i).pre;
        if (a.lo < b.lo - 1e-9 || a.hi > b.hi + 1e-9) ++not_contained;
      }
  }
  const Network adv = tightening_fixture();
  const BoundSet bun = bounds_interval_bunel(adv);
  const BoundSet tj = bounds_lp_tjeng(adv, bun);
  std::size_t strict = 0;
  for (std::size_t l = 1; l <= adv.num_layers(); ++l)
    for (std::size_t i = 0; i < bun.layers[l - 1].size(); ++i) {
      const Interval a = tj.at(l, i).pre, b = bun.at(l, i).pre;
      if (a.lo > b.lo + 1e-9 || a.hi < b.hi - 1e-9) ++strict;
    }
  return {not_contained == 0 && strict >= 1,
          fmt("%zu nets, %zu units, %zu not contained; %zu strictly tighter units on the 2-2-1 instance "
              "(output hi %.4g vs %.4g)",
              nets.size(), units, not_contained, strict, tj.at(2, 0).pre.hi, bun.at(2, 0).pre.hi)};
}

Outcome valid_inequalities() {
  FormulationSpec plain;
  plain.relu = ReluFormulation::Extended;
  FormulationSpec vi = plain;
  vi.valid_inequalities = true;
  std::vector<AttackFixture> all = small_attack_fixtures();
  all.push_back(large_attack_fixture());
  double worst_mip = 0.0, worst_lp = 0.0;
  int models = 0;
  bool ok = true;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const AttackFixture& f = all[k];
    std::vector<std::pair<Encoding, Encoding>> pairs;
    pairs.emplace_back(attack_model(f.net, f.spec, plain), attack_model(f.net, f.spec, vi));
    if (k < std::size(kSmallNetSeeds)) {
      const auto coef = random_objective(kSmallNetSeeds[k]);
      Encoding a = objective_model(f.net, coef, plain), b = objective_model(f.net, coef, vi);
      // Minimize as well, so the LP comparison sees both directions.
      pairs.emplace_back(std::move(a), std::move(b));
      Encoding c = objective_model(f.net, coef, plain), d = objective_model(f.net, coef, vi);
      std::vector<Term> obj = c.model.objective().terms;
      c.model.set_objective(ObjSense::Minimize, obj);
      d.model.set_objective(ObjSense::Minimize, d.model.objective().terms);
      pairs.emplace_back(std::move(c), std::move(d));
    }
    for (auto& [a, b] : pairs) {
      SolverParams p;
      p.time_limit = 300;
      const SolveResult ra = solve_mip(a.model, p), rb = solve_mip(b.model, p);
      if (ra.status != SolveStatus::Optimal || rb.status != SolveStatus::Optimal) {
        ok = false;
        continue;
      }
      worst_mip = std::max(worst_mip, std::abs(ra.objective - rb.objective));
      const SolveResult la = solve_lp(a.model), lb = solve_lp(b.model);
      const double sign = a.model.objective().sense == ObjSense::Minimize ? 1.0 : -1.0;
      // Positive when the VI relaxation is looser.
      worst_lp = std::max(worst_lp, sign * (la.objective - lb.objective));
      ++models;
    }
  }
  ok = ok && worst_mip <= 1e-6 && worst_lp <= 1e-9;
  return {ok, fmt("%d model pairs, max MILP |diff| %.2e, max LP loosening %.2e", models, worst_mip,
                  std::max(0.0, worst_lp))};
}

double cut_violation(const Cut& c, const std::vector<double>& x) {
  double lhs = 0.0;
  for (const Term& t : c.terms) lhs += t.coef * x[t.var];
  return lhs - c.rhs;
}

HullNeuron random_unit(std::mt19937_64& rng, std::size_t n) {
  HullNeuron h;
  for (std::size_t k = 0; k < n; ++k) {
    h.inputs.push_back(VarId(k));
    h.weights.push_back(2 * uniform01(rng) - 1);
    const double a = 4 * uniform01(rng) - 2, b = 4 * uniform01(rng) - 2;
    h.input_bounds.push_back({std::min(a, b), std::max(a, b)});
  }
  h.y = VarId(n);
  h.z = VarId(n + 1);
  h.bias = 2 * uniform01(rng) - 1;
  return h;
}

Outcome hull_cuts() {
  std::mt19937_64 rng(6000);
  std::size_t cut_integer = 0, subset_checks = 0;
  for (int s = 0; s < 10000; ++s) {
    const std::size_t n = 1 + rng() % 10;
    const HullNeuron h = random_unit(rng, n);
    std::vector<double> p(n + 2);
    double y = h.bias;
    for (std::size_t k = 0; k < n; ++k) {
      p[k] = h.input_bounds[k].lo + uniform01(rng) * h.input_bounds[k].width();
      y += h.weights[k] * p[k];
    }
    p[n] = std::max(0.0, y);
    p[n + 1] = y > 0 ? 1.0 : 0.0;
    if (separate_hull_cut(h, p)) ++cut_integer;
    // Every subset inequality is valid, not only the separated one.
    if (s % 10 == 0) {
      for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<std::size_t> sub;
        for (std::size_t k = 0; k < n; ++k)
          if ((mask >> k) & 1) sub.push_back(k);
        ++subset_checks;
        if (cut_violation(hull_cut_for_subset(h, sub), p) > 1e-9) ++cut_integer;
      }
    }
  }
  std::size_t fractional = 0, separated = 0, mismatched = 0;
  for (int s = 0; s < 2000; ++s) {
    const std::size_t n = 1 + rng() % 10;
    const HullNeuron h = random_unit(rng, n);
    std::vector<double> p(n + 2);
    for (std::size_t k = 0; k < n; ++k) p[k] = h.input_bounds[k].lo + uniform01(rng) * h.input_bounds[k].width();
    p[n] = 3 * uniform01(rng);
    p[n + 1] = 0.05 + 0.9 * uniform01(rng);
    ++fractional;
    double best = -kInf;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      std::vector<std::size_t> sub;
      for (std::size_t k = 0; k < n; ++k)
        if ((mask >> k) & 1) sub.push_back(k);
      best = std::max(best, cut_violation(hull_cut_for_subset(h, sub), p));
    }
    const auto cut = separate_hull_cut(h, p);
    if (best > 1e-7) {
      ++separated;
      if (!cut || std::abs(cut_violation(*cut, p) - best) > 1e-9 * std::max(1.0, best)) ++mismatched;
    } else if (cut) {
      ++mismatched;
    }
  }
  return {cut_integer == 0 && mismatched == 0,
          fmt("10000 integer points (%zu subset checks): %zu cut; %zu fractional points, %zu separable, "
              "%zu differ from subset enumeration",
              subset_checks, cut_integer, fractional, separated, mismatched)};
}

SolveResult large_result;
std::string large_doc;

Outcome large_attack() {
  const AttackFixture f = large_attack_fixture();
  SolverParams p;
  p.time_limit = 300;
  const auto t0 = Clock::now();
  const AttackRun run = run_attack(f.net, f.spec, {}, p);
  const double t = since(t0);
  large_result = run.result;
  large_doc = solve_result_to_string(run.result, &run.encoding.model, true);
  const bool solved = run.result.status == SolveStatus::Optimal || run.result.status == SolveStatus::Feasible;
  if (!solved || !run.report) return {false, fmt("status %s after %.1f s", status_name(run.result.status), t)};
  const AttackReport& r = *run.report;
  const double l1_diff = std::abs(r.l1 - run.result.objective);
  return {t <= 300.0 && r.margin_ok && r.in_box && l1_diff <= 1e-6,
          fmt("target %zu, status %s, objective %.6f, gap %.2e, nodes %lld, worst margin slack %.2e, "
              "|L1 - objective| %.2e, predicted %zu",
              r.target, status_name(run.result.status), run.result.objective, run.result.gap,
              (long long)run.result.nodes, r.worst_margin_slack, l1_diff, r.predicted)};
}

Outcome training() {
  std::string detail;
  bool ok = true;
  for (TrainingVariant v : {TrainingVariant::BinaryStep, TrainingVariant::Binarized}) {
    const TrainingSpec s = xor_spec(v);
    const auto t0 = Clock::now();
    const MipModel m = encode_training(s);
    SolverParams p;
    p.time_limit = 60;
    const SolveResult r = solve_mip(m, p);
    const double t = since(t0);
    const double oracle = v == TrainingVariant::Binarized ? ternary_weight_search(s.arch, s.data, s.P, s.loss).best_loss
                                                          : lattice_weight_search(s.arch, s.data, s.loss).best_loss;
    std::size_t correct = 0;
    if (r.status == SolveStatus::Optimal) {
      const TrainedNetwork tn = decode_trained(s, m, r);
      for (std::size_t k = 0; k < s.data.size(); ++k)
        if (predict_class(s, forward(tn.net, s.data.inputs[k]).output()) == s.data.labels[k]) ++correct;
    }
    const bool this_ok = r.status == SolveStatus::Optimal && std::abs(r.objective) <= 1e-6 &&
                         std::abs(oracle) <= 1e-9 && t < 60.0 && correct == 4;
    ok = ok && this_ok;
    detail += fmt("%s%s/%s loss %.3g (search %.3g) in %.2f s, %zu/4 correct", detail.empty() ? "" : "; ",
                  v == TrainingVariant::Binarized ? "binarized P=1" : "binary-step", loss_name(s.loss), r.objective,
                  oracle, t, correct);
  }
  return {ok, detail};
}

Outcome mps_round_trip() {
  std::vector<std::pair<std::string, MipModel>> models;
  const AttackFixture f = small_attack_fixture(kSmallNetSeeds[0]);
  for (const Named& n : all_formulations()) models.emplace_back(n.name, attack_model(f.net, f.spec, n.spec).model);
  const Network pooled = tu::pooled_net(17, true);
  Encoding pe = encode_network(pooled, bounds_interval_bunel(pooled), {});
  pe.model.set_objective(ObjSense::Maximize, {{pe.outputs.back()[0], 1.0}});
  models.emplace_back("maxpool", std::move(pe.model));
  for (TrainingVariant v : {TrainingVariant::BinaryStep, TrainingVariant::Binarized})
    models.emplace_back(v == TrainingVariant::Binarized ? "train/binarized" : "train/binary-step",
                        encode_training(xor_spec(v)));
  int bad = 0;
  std::string which;
  double worst = 0.0;
  for (const auto& [name, m] : models) {
    const std::string text = export_mps(m);
    const MipModel back = parse_mps(text);
    const bool fixpoint = export_mps(back) == text;
    const SolveResult a = solve_mip(m), b = solve_mip(back);
    const double diff = a.status == SolveStatus::Optimal ? std::abs(a.objective - b.objective) : 0.0;
    worst = std::max(worst, diff);
    if (!fixpoint || a.status != b.status || diff > 1e-9) {
      ++bad;
      which += " " + name;
    }
  }
  return {bad == 0, fmt("%zu model classes, %d failing%s, max re-solve |diff| %.2e", models.size(), bad,
                        which.c_str(), worst)};
}

Outcome determinism() {
  auto docs = [] {
    std::vector<std::string> out;
    for (const AttackFixture& f : small_attack_fixtures())
      for (const Named& n : all_formulations()) {
        const Encoding enc = attack_model(f.net, f.spec, n.spec);
        out.push_back(solve_result_to_string(solve_encoding(enc), &enc.model, true));
      }
    for (TrainingVariant v : {TrainingVariant::BinaryStep, TrainingVariant::Binarized}) {
      const MipModel m = encode_training(xor_spec(v));
      out.push_back(solve_result_to_string(solve_mip(m), &m, true));
    }
    return out;
  };
  const auto a = docs(), b = docs();
  std::size_t differ = 0;
  for (std::size_t k = 0; k < a.size(); ++k) differ += a[k] != b[k];
  // The large attack once more, against its run above.
  const AttackFixture f = large_attack_fixture();
  SolverParams p;
  p.time_limit = 300;
  const AttackRun again = run_attack(f.net, f.spec, {}, p);
  const bool large_same = large_doc.empty() || again.result.status == SolveStatus::Feasible ||
                          solve_result_to_string(again.result, &again.encoding.model, true) == large_doc;
  return {differ == 0 && large_same,
          fmt("%zu result documents repeated, %zu differ; large attack repeat %s", a.size(), differ,
              large_doc.empty() ? "skipped" : (large_same ? "identical" : "differs"))};
}

}  // namespace

int main() {
  report(1, "cross-formulation agreement", cross_formulation);
  report(2, "LP relaxation of every attack model is zero", lp_relaxation_zero);
  report(3, "bound soundness fuzz", bound_fuzz);
  report(4, "LP tightening contained and strictly tighter", tightening);
  report(5, "valid inequalities keep the optimum and tighten the LP", valid_inequalities);
  report(6, "hull-cut validity and most-violated separation", hull_cuts);
  report(7, "large-net adversarial attack end to end", large_attack);
  report(8, "XOR training to zero loss", training);
  report(9, "MPS round trip", mps_round_trip);
  report(10, "determinism of result documents", determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
