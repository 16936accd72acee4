#include "relumip/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "relumip/encodings.hpp"
#include "relumip/errors.hpp"
#include "relumip/json_util.hpp"

namespace relumip {

const char* bound_method_name(BoundMethod m) {
  switch (m) {
    case BoundMethod::Bunel:
      return "bunel";
    case BoundMethod::Cheng:
      return "cheng";
    case BoundMethod::Tjeng:
      return "tjeng";
    case BoundMethod::Serra:
      return "serra";
  }
  return "?";
}

BoundMethod parse_bound_method(const std::string& s) {
  for (BoundMethod m : {BoundMethod::Bunel, BoundMethod::Cheng, BoundMethod::Tjeng, BoundMethod::Serra})
    if (s == bound_method_name(m)) return m;
  throw ParseError("unknown bound method '" + s + "'");
}

const char* stability_name(Stability s) {
  switch (s) {
    case Stability::StablyActive:
      return "active";
    case Stability::StablyInactive:
      return "inactive";
    case Stability::Unstable:
      return "unstable";
  }
  return "?";
}

std::size_t BoundSet::count(Stability s) const {
  std::size_t n = 0;
  for (const auto& layer : layers)
    for (const NeuronBounds& nb : layer)
      if (nb.relu && nb.stability == s) ++n;
  return n;
}

namespace {

Stability stability_of(const Interval& pre) {
  if (pre.hi <= 0.0) return Stability::StablyInactive;
  if (pre.lo >= 0.0) return Stability::StablyActive;
  return Stability::Unstable;
}

Interval activate(Activation act, const Interval& pre, double offset) {
  switch (act) {
    case Activation::Relu:
      return {std::max(0.0, pre.lo), std::max(0.0, pre.hi)};
    case Activation::Linear:
      return pre;
    case Activation::Step:
    case Activation::Sign:
      return {apply_activation(act, pre.lo, offset), apply_activation(act, pre.hi, offset)};
  }
  return pre;
}

// Fills post/m_plus/m_minus/stability from pre; big-M follows the method's rule.
void finish_neuron(NeuronBounds& nb, const DenseLayer& d, BoundMethod method) {
  nb.relu = d.activation == Activation::Relu;
  nb.post = activate(d.activation, nb.pre, d.step_offset);
  nb.m_plus = std::max(0.0, nb.pre.hi);
  nb.m_minus = std::max(0.0, -nb.pre.lo);
  nb.stability = nb.relu ? stability_of(nb.pre) : Stability::StablyActive;
  if (method == BoundMethod::Cheng)
    nb.big_m = (nb.relu && nb.stability == Stability::Unstable) ? nb.pre.hi : 0.0;
  else
    nb.big_m = std::max({0.0, -nb.pre.lo, nb.pre.hi});
}

NeuronBounds pooled(const std::vector<Interval>& in, const std::vector<std::size_t>& pool, bool is_max) {
  NeuronBounds nb;
  if (is_max) {
    nb.pre = {-kInf, -kInf};
    for (std::size_t j : pool) {
      nb.pre.lo = std::max(nb.pre.lo, in[j].lo);
      nb.pre.hi = std::max(nb.pre.hi, in[j].hi);
    }
  } else {
    double lo = 0.0, hi = 0.0;
    for (std::size_t j : pool) {
      lo += in[j].lo;
      hi += in[j].hi;
    }
    const double k = static_cast<double>(pool.size());
    nb.pre = {lo / k, hi / k};
  }
  nb.post = nb.pre;
  nb.m_plus = std::max(0.0, nb.pre.hi);
  nb.m_minus = std::max(0.0, -nb.pre.lo);
  nb.big_m = std::max(nb.m_plus, nb.m_minus);
  nb.stability = Stability::StablyActive;
  return nb;
}

std::vector<Interval> outputs_of(const BoundSet& b, std::size_t l) {
  if (l == 0) return b.input;
  std::vector<Interval> out;
  for (const NeuronBounds& nb : b.layers[l - 1]) out.push_back(nb.post);
  return out;
}

std::vector<NeuronBounds> pool_layer(const Layer& layer, const std::vector<Interval>& in) {
  std::vector<NeuronBounds> out;
  if (const auto* mp = std::get_if<MaxPoolLayer>(&layer)) {
    for (const auto& pool : mp->pools) out.push_back(pooled(in, pool, true));
  } else {
    for (const auto& pool : std::get<AvgPoolLayer>(layer).pools) out.push_back(pooled(in, pool, false));
  }
  return out;
}

// Interval arithmetic over the previous layer's output box. Layer 1 sees the raw input box;
// later layers see post-activation intervals, which are already nonnegative after ReLU.
BoundSet interval_bounds(const Network& net, BoundMethod method) {
  BoundSet b;
  b.method = method;
  b.input = net.input_box();
  for (std::size_t l = 1; l <= net.num_layers(); ++l) {
    const std::vector<Interval> in = outputs_of(b, l - 1);
    const Layer& layer = net.layer(l);
    const auto* d = std::get_if<DenseLayer>(&layer);
    if (!d) {
      b.layers.push_back(pool_layer(layer, in));
      continue;
    }
    std::vector<NeuronBounds> out(d->outputs());
    for (std::size_t i = 0; i < d->outputs(); ++i) {
      double lo = d->bias[i], hi = d->bias[i];
      for (std::size_t j = 0; j < d->inputs(); ++j) {
        const double w = d->weights(j, i);
        if (w == 0.0) continue;
        const double a = w * in[j].lo, c = w * in[j].hi;
        lo += std::min(a, c);
        hi += std::max(a, c);
      }
      Interval pre{d->scale * lo, d->scale * hi};
      if (pre.lo > pre.hi) std::swap(pre.lo, pre.hi);
      out[i].pre = pre;
      finish_neuron(out[i], *d, method);
    }
    b.layers.push_back(std::move(out));
  }
  return b;
}

}  // namespace

BoundSet bounds_interval_bunel(const Network& net) { return interval_bounds(net, BoundMethod::Bunel); }

BoundSet bounds_interval_cheng(const Network& net) { return interval_bounds(net, BoundMethod::Cheng); }

BoundSet bounds_extended_serra(const Network& net) {
  BoundSet b;
  b.method = BoundMethod::Serra;
  b.input = net.input_box();
  // Each unit output lies in [-neg, pos]; ReLU outputs have neg = 0.
  std::vector<double> pos, neg;
  for (const Interval& iv : net.input_box()) {
    pos.push_back(std::max(0.0, iv.hi));
    neg.push_back(std::max(0.0, -iv.lo));
  }
  for (std::size_t l = 1; l <= net.num_layers(); ++l) {
    const Layer& layer = net.layer(l);
    std::vector<double> npos, nneg;
    std::vector<NeuronBounds> out;
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      for (std::size_t i = 0; i < d->outputs(); ++i) {
        double up = 0.0, down = 0.0;
        for (std::size_t j = 0; j < d->inputs(); ++j) {
          const double w = d->weights(j, i);
          up += std::max({0.0, w * pos[j], -w * neg[j]});
          down += std::max({0.0, -w * pos[j], w * neg[j]});
        }
        const double b_i = d->bias[i];
        double mp = std::max(0.0, up + b_i);
        double mm = std::max(0.0, down - b_i);
        if (d->scale != 1.0) {
          const double s = d->scale;
          std::tie(mp, mm) = s >= 0 ? std::pair{s * mp, s * mm} : std::pair{-s * mm, -s * mp};
        }
        NeuronBounds nb;
        nb.pre = {-mm, mp};
        finish_neuron(nb, *d, BoundMethod::Serra);
        nb.m_plus = mp;
        nb.m_minus = mm;
        nb.big_m = std::max(mp, mm);
        out.push_back(nb);
        npos.push_back(std::max(0.0, nb.post.hi));
        nneg.push_back(std::max(0.0, -nb.post.lo));
      }
    } else {
      std::vector<Interval> in;
      for (std::size_t j = 0; j < pos.size(); ++j) in.push_back({-neg[j], pos[j]});
      out = pool_layer(layer, in);
      for (const NeuronBounds& nb : out) {
        npos.push_back(nb.m_plus);
        nneg.push_back(nb.m_minus);
      }
    }
    b.layers.push_back(std::move(out));
    pos = std::move(npos);
    neg = std::move(nneg);
  }
  return b;
}

BoundSet bounds_lp_tjeng(const Network& net, const BoundSet& seed, const TjengOptions& opts) {
  if (seed.layers.size() != net.num_layers()) throw DimensionError("seed bounds do not match network");
  BoundSet out = seed;
  out.method = BoundMethod::Tjeng;
  FormulationSpec spec;
  spec.relu = ReluFormulation::BigM;
  spec.bound_method = BoundMethod::Tjeng;
  spec.simplify_stable = true;

  for (std::size_t l = 1; l <= net.num_layers(); ++l) {
    const Layer& layer = net.layer(l);
    const auto* d = std::get_if<DenseLayer>(&layer);
    if (!d) {
      out.layers[l - 1] = pool_layer(layer, outputs_of(out, l - 1));
      continue;
    }
    if (d->activation != Activation::Relu && d->activation != Activation::Linear)
      throw EncodingError("LP bounds support ReLU and linear layers only");

    Encoding enc = encode_network(net, out, spec, l - 1);
    const std::vector<VarId>& prev = enc.outputs[l - 1];
    std::optional<LpEngine> lp;
    if (!opts.exact_mip) lp.emplace(enc.model, opts.params.feasibility_tolerance);

    for (std::size_t i = 0; i < d->outputs(); ++i) {
      NeuronBounds& nb = out.at(l, i);
      std::vector<Term> terms;
      for (std::size_t j = 0; j < d->inputs(); ++j)
        if (d->weights(j, i) != 0.0) terms.push_back({prev[j], d->scale * d->weights(j, i)});
      const double offset = d->scale * d->bias[i];

      double extreme[2];
      bool ok = true;
      for (int k = 0; k < 2 && ok; ++k) {
        const ObjSense sense = k == 0 ? ObjSense::Minimize : ObjSense::Maximize;
        if (lp) {
          lp->set_objective(sense, terms);
          ok = lp->solve() == LpEngine::Status::Optimal;
          if (ok) extreme[k] = lp->objective_value();
        } else {
          MipModel m = enc.model;
          m.set_objective(sense, terms);
          SolveResult r = solve_mip(m, opts.params);
          ok = r.status == SolveStatus::Optimal;
          // The proven bound, not the incumbent, is what keeps the interval sound.
          if (ok) extreme[k] = r.bound;
        }
      }
      if (!ok) {
        out.warnings.push_back("layer " + std::to_string(l) + " neuron " + std::to_string(i) +
                               ": bound solve failed, seed interval kept");
        continue;
      }
      // Small outward pad absorbs simplex round-off.
      const double lo = extreme[0] + offset - 1e-10 * std::max(1.0, std::abs(extreme[0] + offset));
      const double hi = extreme[1] + offset + 1e-10 * std::max(1.0, std::abs(extreme[1] + offset));
      const Interval& s = seed.at(l, i).pre;
      Interval tight{std::max(s.lo, lo), std::min(s.hi, hi)};
      if (tight.lo > tight.hi) {
        out.warnings.push_back("layer " + std::to_string(l) + " neuron " + std::to_string(i) +
                               ": empty intersection, seed interval kept");
        continue;
      }
      nb.pre = tight;
      finish_neuron(nb, *d, BoundMethod::Tjeng);
    }
  }
  return out;
}

BoundSet classify_stability(BoundSet bounds) {
  for (auto& layer : bounds.layers)
    for (NeuronBounds& nb : layer) nb.stability = nb.relu ? stability_of(nb.pre) : Stability::StablyActive;
  return bounds;
}

BoundSet compute_bounds(const Network& net, BoundMethod method, const TjengOptions& opts) {
  switch (method) {
    case BoundMethod::Bunel:
      return bounds_interval_bunel(net);
    case BoundMethod::Cheng:
      return bounds_interval_cheng(net);
    case BoundMethod::Serra:
      return bounds_extended_serra(net);
    case BoundMethod::Tjeng:
      return bounds_lp_tjeng(net, bounds_interval_bunel(net), opts);
  }
  throw Error("unreachable");
}

namespace {

using nlohmann::json;

json pair_of(const Interval& iv) { return json::array({iv.lo, iv.hi}); }

Interval interval_of(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("interval must be a [lo, hi] pair");
  Interval iv{j[0].get<double>(), j[1].get<double>()};
  if (iv.lo > iv.hi) throw IntervalError("interval has lo > hi");
  return iv;
}

Stability parse_stability(const std::string& s) {
  for (Stability st : {Stability::StablyActive, Stability::StablyInactive, Stability::Unstable})
    if (s == stability_name(st)) return st;
  throw ParseError("unknown stability '" + s + "'");
}

}  // namespace

std::string bounds_to_string(const BoundSet& b) {
  json j;
  j["method"] = bound_method_name(b.method);
  json input = json::array();
  for (const Interval& iv : b.input) input.push_back(pair_of(iv));
  j["input"] = std::move(input);
  json layers = json::array();
  for (const auto& layer : b.layers) {
    json units = json::array();
    for (const NeuronBounds& nb : layer) {
      units.push_back({{"pre", pair_of(nb.pre)},
                       {"post", pair_of(nb.post)},
                       {"big_m", nb.big_m},
                       {"m_plus", nb.m_plus},
                       {"m_minus", nb.m_minus},
                       {"stability", stability_name(nb.stability)},
                       {"relu", nb.relu}});
    }
    layers.push_back(std::move(units));
  }
  j["layers"] = std::move(layers);
  j["warnings"] = b.warnings;
  return j.dump(2) + "\n";
}

BoundSet parse_bounds(const std::string& text) {
  const json j = parse_json(text, "bounds");
  try {
    BoundSet b;
    b.method = parse_bound_method(require(j, "method").get<std::string>());
    for (const json& iv : require(j, "input")) b.input.push_back(interval_of(iv));
    for (const json& layer : require(j, "layers")) {
      std::vector<NeuronBounds> units;
      for (const json& u : layer) {
        NeuronBounds nb;
        nb.pre = interval_of(require(u, "pre"));
        nb.post = interval_of(require(u, "post"));
        nb.big_m = require(u, "big_m").get<double>();
        nb.m_plus = require(u, "m_plus").get<double>();
        nb.m_minus = require(u, "m_minus").get<double>();
        nb.stability = parse_stability(require(u, "stability").get<std::string>());
        nb.relu = u.value("relu", true);
        units.push_back(nb);
      }
      b.layers.push_back(std::move(units));
    }
    if (j.contains("warnings")) b.warnings = j["warnings"].get<std::vector<std::string>>();
    return b;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bounds: ") + e.what());
  }
}

BoundSet load_bounds(const std::filesystem::path& path) { return parse_bounds(read_text_file(path)); }

void save_bounds(const BoundSet& b, const std::filesystem::path& path) {
  write_text_file(path, bounds_to_string(b));
}

}  // namespace relumip
