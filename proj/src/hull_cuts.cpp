#include <algorithm>
#include <numeric>

#include "relumip/encodings.hpp"

namespace relumip {

namespace {

struct Ends {
  double lo_hat, up_hat;
};

// The endpoint that minimizes w_i x_i sits at L-hat, the maximizing one at U-hat.
Ends ends(double w, const Interval& iv) { return w >= 0.0 ? Ends{iv.lo, iv.hi} : Ends{iv.hi, iv.lo}; }

Cut build(const HullNeuron& u, const std::vector<char>& in_s) {
  Cut c;
  c.sense = Sense::LessEqual;
  double z_coef = u.bias;
  double rhs = 0.0;
  c.terms.push_back({u.y, 1.0});
  for (std::size_t k = 0; k < u.inputs.size(); ++k) {
    const double w = u.weights[k];
    if (w == 0.0) continue;
    const Ends e = ends(w, u.input_bounds[k]);
    if (in_s[k]) {
      c.terms.push_back({u.inputs[k], -w});
      z_coef += w * e.lo_hat;
      rhs -= w * e.lo_hat;
    } else {
      z_coef += w * e.up_hat;
    }
  }
  c.terms.push_back({u.z, -z_coef});
  c.rhs = rhs;
  return c;
}

double violation(const Cut& c, std::span<const double> point) {
  double lhs = 0.0;
  for (const Term& t : c.terms) lhs += t.coef * point[t.var];
  return lhs - c.rhs;
}

std::optional<std::pair<Cut, double>> most_violated(const HullNeuron& u, std::span<const double> point) {
  const double z = point[u.z];
  std::vector<char> in_s(u.inputs.size(), 0);
  for (std::size_t k = 0; k < u.inputs.size(); ++k) {
    const double w = u.weights[k];
    if (w == 0.0) continue;
    const Ends e = ends(w, u.input_bounds[k]);
    // Strict comparison: ties stay out of S.
    in_s[k] = w * (point[u.inputs[k]] - e.lo_hat * (1.0 - z)) < w * e.up_hat * z;
  }
  Cut c = build(u, in_s);
  const double v = violation(c, point);
  if (v <= 1e-7) return std::nullopt;
  return std::pair{std::move(c), v};
}

}  // namespace

Cut hull_cut_for_subset(const HullNeuron& unit, const std::vector<std::size_t>& subset) {
  std::vector<char> in_s(unit.inputs.size(), 0);
  for (std::size_t k : subset) in_s.at(k) = 1;
  return build(unit, in_s);
}

std::optional<Cut> separate_hull_cut(const HullNeuron& unit, std::span<const double> point) {
  auto r = most_violated(unit, point);
  if (!r) return std::nullopt;
  return std::move(r->first);
}

std::vector<Cut> HullCutSeparator::separate(std::span<const double> x) {
  std::vector<std::pair<Cut, double>> found;
  for (const HullNeuron& u : units_)
    if (auto r = most_violated(u, x)) found.push_back(std::move(*r));
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<Cut> out;
  for (auto& f : found) out.push_back(std::move(f.first));
  return out;
}

}  // namespace relumip
