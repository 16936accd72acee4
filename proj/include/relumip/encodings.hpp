#ifndef RELUMIP_ENCODINGS_HPP_
#define RELUMIP_ENCODINGS_HPP_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relumip/bounds.hpp"
#include "relumip/mip_model.hpp"
#include "relumip/network.hpp"
#include "relumip/solver.hpp"

namespace relumip {

enum class ReluFormulation { BigM, Extended, Disjunctive, BigMHullCuts };
enum class PartitionBounds { Interval, Lp };

const char* formulation_name(ReluFormulation f);
ReluFormulation parse_formulation(const std::string& s);

struct FormulationSpec {
  ReluFormulation relu = ReluFormulation::BigM;
  bool valid_inequalities = false;  // Extended only
  int partitions = 1;               // Disjunctive only
  PartitionBounds partition_bounds = PartitionBounds::Interval;
  int max_rounds = 10;              // hull-cut rounds at the root
  int max_cuts_per_round = 50;
  BoundMethod bound_method = BoundMethod::Bunel;
  bool simplify_stable = true;

  void validate() const;
};

/// Variables emitted for one unit. Unused slots hold kNoVar.
struct NeuronEncoding {
  VarId x = kNoVar;      // unit output
  VarId xbar = kNoVar;   // complement (extended)
  VarId z = kNoVar;      // ReLU indicator
  std::vector<VarId> ya, yb;     // disjunct parts, one per partition
  std::vector<std::vector<std::size_t>> partitions;  // input indices per partition
  std::vector<VarId> delta;      // max-pool indicators, one per pool member
  bool simplified = false;       // stable unit encoded without an indicator
};

/// Data needed to separate hull inequalities for one big-M encoded ReLU.
struct HullNeuron {
  std::size_t layer = 0, neuron = 0;
  VarId y = kNoVar;  // unit output
  VarId z = kNoVar;
  std::vector<VarId> inputs;
  std::vector<double> weights;
  std::vector<Interval> input_bounds;
  double bias = 0.0;
};

struct Encoding {
  MipModel model;
  std::vector<std::vector<VarId>> outputs;            // outputs[l][i], l = 0 is the input
  std::vector<std::vector<NeuronEncoding>> neurons;   // neurons[l][i], l >= 1
  std::vector<HullNeuron> hull;
  FormulationSpec spec;
};

/// Encodes layers 1..num_layers (default: all) of the network.
Encoding encode_network(const Network& net, const BoundSet& bounds, const FormulationSpec& spec,
                        std::optional<std::size_t> num_layers = std::nullopt);

/// Contiguous equal-size partition of [0, fan_in) into k groups.
std::vector<std::vector<std::size_t>> equal_partitions(std::size_t fan_in, int k);

/// Builds a full model assignment from the forward pass at x0 (indicators from the sign of y).
std::vector<double> assignment_from_forward(const Encoding& enc, const Network& net,
                                            std::span<const double> x0);

/// Most violated hull inequality for one unit at point (x, z, y), or nothing when the
/// violation is at most 1e-7.
std::optional<Cut> separate_hull_cut(const HullNeuron& unit, std::span<const double> point);

/// The hull inequality for an explicit index subset (positions into unit.inputs).
Cut hull_cut_for_subset(const HullNeuron& unit, const std::vector<std::size_t>& subset);

class HullCutSeparator : public CutSeparator {
 public:
  explicit HullCutSeparator(std::vector<HullNeuron> units) : units_(std::move(units)) {}
  std::vector<Cut> separate(std::span<const double> x) override;

 private:
  std::vector<HullNeuron> units_;
};

/// Solves an encoded model, attaching hull-cut separation when the formulation asks for it.
SolveResult solve_encoding(const Encoding& enc, SolverParams params = {});

}  // namespace relumip

#endif  // RELUMIP_ENCODINGS_HPP_
