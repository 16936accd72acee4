#include "relumip/adversarial.hpp"

#include <cmath>

#include "relumip/errors.hpp"
#include "relumip/json_util.hpp"

namespace relumip {

using nlohmann::json;

std::size_t default_target(std::size_t true_class) { return (true_class + 5) % 10; }

void AttackSpec::validate(const Network& net) const {
  if (reference.size() != net.input_dim())
    throw DimensionError("reference input has " + std::to_string(reference.size()) + " entries, network expects " +
                         std::to_string(net.input_dim()));
  for (std::size_t j = 0; j < reference.size(); ++j)
    if (!net.input_box()[j].contains(reference[j]))
      throw ModelError("reference input entry " + std::to_string(j) + " lies outside the input box");
  if (!(margin > 1.0)) throw ModelError("margin factor must exceed 1");
  const std::size_t l = logits(net);
  if (l < 1 || l > net.num_layers()) throw ModelError("logits layer out of range");
  const std::size_t classes = net.width(l);
  if (classes < 2) throw ModelError("logits layer has fewer than 2 outputs");
  if (true_class >= classes) throw ModelError("true class out of range");
  const std::size_t t = target_class();
  if (t >= classes)
    throw ModelError("target class " + std::to_string(t) + " does not exist in a " + std::to_string(classes) +
                     "-class logits layer");
  if (t == true_class) throw ModelError("target class equals the true class");
}

Encoding build_attack(Encoding enc, const Network& net, const AttackSpec& spec) {
  spec.validate(net);
  const std::size_t l = spec.logits(net);
  if (enc.outputs.size() <= l) throw ModelError("encoding does not reach the logits layer");
  MipModel& m = enc.model;
  const auto& logits = enc.outputs[l];
  const std::size_t t = spec.target_class();
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (j == t) continue;
    m.add_constraint("margin_c" + std::to_string(j), {{logits[t], 1.0}, {logits[j], -spec.margin}},
                     Sense::GreaterEqual, 0.0);
  }
  std::vector<Term> obj;
  for (std::size_t j = 0; j < spec.reference.size(); ++j) {
    const std::string n = "_n" + std::to_string(j);
    const VarId x = enc.outputs[0][j];
    const VarId d = m.add_continuous("d" + n, 0.0, kInf, VarMeta{0, int(j), VarRole::Distance});
    m.add_constraint("dist_pos" + n, {{d, 1.0}, {x, -1.0}}, Sense::GreaterEqual, -spec.reference[j]);
    m.add_constraint("dist_neg" + n, {{d, 1.0}, {x, 1.0}}, Sense::GreaterEqual, spec.reference[j]);
    obj.push_back({d, 1.0});
  }
  m.set_objective(ObjSense::Minimize, std::move(obj));
  return enc;
}

AttackReport verify_attack(const Network& net, const AttackSpec& spec, const std::vector<double>& x0, double tol) {
  AttackReport r;
  r.target = spec.target_class();
  const Activations a = forward(net, x0);
  r.logits = a.post.at(spec.logits(net));
  r.predicted = argmax(r.logits);
  for (std::size_t j = 0; j < x0.size(); ++j) r.l1 += std::abs(x0[j] - spec.reference.at(j));
  r.in_box = true;
  for (std::size_t j = 0; j < x0.size(); ++j)
    if (!net.input_box()[j].contains(x0[j], tol)) r.in_box = false;
  r.worst_margin_slack = kInf;
  for (std::size_t j = 0; j < r.logits.size(); ++j)
    if (j != r.target)
      r.worst_margin_slack = std::min(r.worst_margin_slack, r.logits.at(r.target) - spec.margin * r.logits[j]);
  r.margin_ok = r.worst_margin_slack >= -tol;
  return r;
}

AttackRun run_attack(const Network& net, const AttackSpec& spec, const FormulationSpec& formulation,
                     const SolverParams& params) {
  spec.validate(net);
  const BoundSet bounds = compute_bounds(net, formulation.bound_method, TjengOptions{false, params});
  AttackRun run{build_attack(encode_network(net, bounds, formulation, spec.logits(net)), net, spec), {}, {}, {}};
  run.result = solve_encoding(run.encoding, params);
  if (run.result.has_incumbent()) {
    for (VarId v : run.encoding.outputs[0]) run.perturbed.push_back(run.result.incumbent[v]);
    run.report = verify_attack(net, spec, run.perturbed);
  }
  return run;
}

std::string attack_report_to_string(const AttackReport& r, const std::vector<double>& x0) {
  json j;
  j["target"] = r.target;
  j["predicted"] = r.predicted;
  j["logits"] = r.logits;
  j["l1"] = r.l1;
  j["worst_margin_slack"] = r.worst_margin_slack;
  j["margin_ok"] = r.margin_ok;
  j["in_box"] = r.in_box;
  j["input"] = x0;
  return j.dump(2) + "\n";
}

AttackSpec parse_attack_spec(const std::string& text) {
  const json doc = parse_json(text, "attack spec");
  if (!doc.is_object()) throw ParseError("attack spec must be an object");
  AttackSpec s;
  try {
    s.reference = require(doc, "reference").get<std::vector<double>>();
    s.true_class = require(doc, "true_class").get<std::size_t>();
    if (doc.contains("target")) s.target = doc["target"].get<std::size_t>();
    if (doc.contains("margin")) s.margin = doc["margin"].get<double>();
    if (doc.contains("logits_layer")) s.logits_layer = doc["logits_layer"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("attack spec: ") + e.what());
  }
  return s;
}

AttackSpec load_attack_spec(const std::filesystem::path& path) { return parse_attack_spec(read_text_file(path)); }

}  // namespace relumip
