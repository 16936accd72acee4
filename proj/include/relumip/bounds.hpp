#ifndef RELUMIP_BOUNDS_HPP_
#define RELUMIP_BOUNDS_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "relumip/network.hpp"
#include "relumip/solver.hpp"

namespace relumip {

enum class BoundMethod { Bunel, Cheng, Tjeng, Serra };
enum class Stability { StablyActive, StablyInactive, Unstable };

const char* bound_method_name(BoundMethod m);
BoundMethod parse_bound_method(const std::string& s);
const char* stability_name(Stability s);

struct NeuronBounds {
  Interval pre;   // y, pre-activation (equals post for pooling and linear units)
  Interval post;  // x
  double big_m = 0.0;
  double m_plus = 0.0;   // bound on the positive part of y
  double m_minus = 0.0;  // bound on the negative part of y
  Stability stability = Stability::Unstable;
  bool relu = false;  // only ReLU units carry a meaningful stability tag
};

struct BoundSet {
  BoundMethod method = BoundMethod::Bunel;
  std::vector<Interval> input;                    // layer 0
  std::vector<std::vector<NeuronBounds>> layers;  // layers[l - 1][i]
  std::vector<std::string> warnings;

  const NeuronBounds& at(std::size_t l, std::size_t i) const { return layers.at(l - 1).at(i); }
  NeuronBounds& at(std::size_t l, std::size_t i) { return layers.at(l - 1).at(i); }
  /// Output interval of unit i in layer l; l = 0 addresses the input box.
  Interval output(std::size_t l, std::size_t i) const {
    return l == 0 ? input.at(i) : at(l, i).post;
  }
  std::size_t count(Stability s) const;
};

BoundSet bounds_interval_bunel(const Network& net);
BoundSet bounds_interval_cheng(const Network& net);
BoundSet bounds_extended_serra(const Network& net);

struct TjengOptions {
  bool exact_mip = false;  // solve the prefix MIP instead of its LP relaxation
  SolverParams params;
};

/// LP (or MIP) tightening over the big-M relaxation of each neuron's prefix network.
BoundSet bounds_lp_tjeng(const Network& net, const BoundSet& seed, const TjengOptions& opts = {});

/// Tags every ReLU neuron from its pre interval. Non-ReLU units are tagged StablyActive.
BoundSet classify_stability(BoundSet bounds);

/// Convenience dispatcher; Tjeng is seeded by Bunel.
BoundSet compute_bounds(const Network& net, BoundMethod method, const TjengOptions& opts = {});

std::string bounds_to_string(const BoundSet& b);
BoundSet parse_bounds(const std::string& text);
BoundSet load_bounds(const std::filesystem::path& path);
void save_bounds(const BoundSet& b, const std::filesystem::path& path);

}  // namespace relumip

#endif  // RELUMIP_BOUNDS_HPP_
