#ifndef RELUMIP_PATTERN_ORACLE_HPP_
#define RELUMIP_PATTERN_ORACLE_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "relumip/mip_model.hpp"
#include "relumip/network.hpp"

namespace relumip {

/// Linear objective and side constraints over network inputs and outputs.
struct OracleProblem {
  struct Row {
    std::vector<double> input;   // empty means all zero
    std::vector<double> output;  // empty means all zero
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
  };

  ObjSense sense = ObjSense::Minimize;
  std::vector<double> input_coef;
  std::vector<double> output_coef;
  std::vector<Row> rows;
  /// Adds sum_j |x0_j - ref_j| to a minimization objective.
  std::optional<std::vector<double>> l1_reference;
};

struct OracleResult {
  bool feasible = false;
  double optimum = 0.0;
  std::vector<double> input;   // argmin / argmax input
  std::size_t patterns = 0;    // activation patterns enumerated (one LP each)
};

/// Brute force: one LP per activation pattern (unstable ReLU on/off, max-pool argmax).
/// Throws when the network exceeds 20 unstable ReLUs or has a pool wider than 3.
OracleResult pattern_oracle(const Network& net, const OracleProblem& problem);

}  // namespace relumip

#endif  // RELUMIP_PATTERN_ORACLE_HPP_
