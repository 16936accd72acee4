#ifndef RELUMIP_ADVERSARIAL_HPP_
#define RELUMIP_ADVERSARIAL_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "relumip/encodings.hpp"
#include "relumip/network.hpp"

namespace relumip {

/// Target class used when none is given: (true_class + 5) mod 10.
std::size_t default_target(std::size_t true_class);

struct AttackSpec {
  std::vector<double> reference;  // the correctly classified input
  std::size_t true_class = 0;
  std::optional<std::size_t> target;
  double margin = 1.2;
  std::optional<std::size_t> logits_layer;  // default: last layer

  std::size_t target_class() const { return target ? *target : default_target(true_class); }
  std::size_t logits(const Network& net) const { return logits_layer ? *logits_layer : net.num_layers(); }
  /// Throws ModelError / DimensionError when the attack does not fit the network.
  void validate(const Network& net) const;
};

/// Adds margin rows on the logits, L1 distance variables and the objective minimize sum d.
/// `enc` must encode `net` up to the logits layer with free input variables.
Encoding build_attack(Encoding enc, const Network& net, const AttackSpec& spec);

struct AttackReport {
  std::size_t target = 0;
  std::size_t predicted = 0;
  std::vector<double> logits;
  double l1 = 0.0;
  double worst_margin_slack = 0.0;  // min_j (logit_t - margin * logit_j)
  bool margin_ok = false;
  bool in_box = false;
};

/// Forward pass on the proposed input; a failed check is an outcome, not an error.
AttackReport verify_attack(const Network& net, const AttackSpec& spec, const std::vector<double>& x0,
                           double tol = 1e-6);

struct AttackRun {
  Encoding encoding;
  SolveResult result;
  std::vector<double> perturbed;  // empty without an incumbent
  std::optional<AttackReport> report;
};

/// Bounds, encoding, attack rows, solve and verification in one call.
AttackRun run_attack(const Network& net, const AttackSpec& spec, const FormulationSpec& formulation,
                     const SolverParams& params = {});

std::string attack_report_to_string(const AttackReport& r, const std::vector<double>& x0);
AttackSpec parse_attack_spec(const std::string& text);
AttackSpec load_attack_spec(const std::filesystem::path& path);

}  // namespace relumip

#endif  // RELUMIP_ADVERSARIAL_HPP_
