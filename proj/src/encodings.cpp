#include "relumip/encodings.hpp"

#include <algorithm>
#include <cmath>

#include "relumip/errors.hpp"

namespace relumip {

const char* formulation_name(ReluFormulation f) {
  switch (f) {
    case ReluFormulation::BigM:
      return "bigm";
    case ReluFormulation::Extended:
      return "extended";
    case ReluFormulation::Disjunctive:
      return "disjunctive";
    case ReluFormulation::BigMHullCuts:
      return "hullcuts";
  }
  return "?";
}

ReluFormulation parse_formulation(const std::string& s) {
  for (ReluFormulation f : {ReluFormulation::BigM, ReluFormulation::Extended, ReluFormulation::Disjunctive,
                            ReluFormulation::BigMHullCuts})
    if (s == formulation_name(f)) return f;
  throw ParseError("unknown formulation '" + s + "'");
}

void FormulationSpec::validate() const {
  if (partitions < 1) throw EncodingError("partition count must be at least 1");
  if (bound_method == BoundMethod::Serra && relu != ReluFormulation::Extended)
    throw EncodingError("serra bounds are only valid with the extended formulation");
  if (max_rounds < 0 || max_cuts_per_round < 0) throw EncodingError("cut limits must be nonnegative");
}

std::vector<std::vector<std::size_t>> equal_partitions(std::size_t fan_in, int k) {
  if (k < 1) throw EncodingError("partition count must be at least 1");
  if (static_cast<std::size_t>(k) > fan_in)
    throw EncodingError("partition count " + std::to_string(k) + " exceeds fan-in " +
                        std::to_string(fan_in));
  std::vector<std::vector<std::size_t>> parts(k);
  for (int p = 0; p < k; ++p) {
    const std::size_t begin = p * fan_in / k, end = (p + 1) * fan_in / k;
    for (std::size_t j = begin; j < end; ++j) parts[p].push_back(j);
  }
  return parts;
}

namespace {

std::string tag(std::size_t l, std::size_t i) { return "_l" + std::to_string(l) + "_n" + std::to_string(i); }

// Neurons whose indicator is a known constant after simplification: 1 active, 0 inactive.
enum class FixedState { None, Inactive, Active };

class Encoder {
 public:
  Encoder(const Network& net, const BoundSet& bounds, const FormulationSpec& spec)
      : net_(net), bounds_(bounds), spec_(spec) {
    enc_.spec = spec;
  }

  Encoding run(std::size_t num_layers) {
    MipModel& m = enc_.model;
    std::vector<VarId> inputs;
    for (std::size_t j = 0; j < net_.input_dim(); ++j) {
      const Interval& iv = net_.input_box()[j];
      inputs.push_back(m.add_continuous("x" + tag(0, j), iv.lo, iv.hi, VarMeta{0, int(j), VarRole::UnitOutput}));
    }
    enc_.outputs.push_back(std::move(inputs));
    enc_.neurons.emplace_back();
    fixed_.emplace_back(net_.input_dim(), FixedState::None);

    for (std::size_t l = 1; l <= num_layers; ++l) {
      const Layer& layer = net_.layer(l);
      enc_.outputs.emplace_back();
      enc_.neurons.emplace_back();
      fixed_.emplace_back();
      if (const auto* d = std::get_if<DenseLayer>(&layer)) {
        if (d->activation != Activation::Relu && d->activation != Activation::Linear)
          throw EncodingError("layer " + std::to_string(l) + ": only ReLU and linear activations are encodable");
        for (std::size_t i = 0; i < d->outputs(); ++i) dense_unit(l, i, *d);
      } else if (const auto* mp = std::get_if<MaxPoolLayer>(&layer)) {
        for (std::size_t i = 0; i < mp->pools.size(); ++i) max_pool(l, i, mp->pools[i]);
      } else {
        const auto& ap = std::get<AvgPoolLayer>(layer);
        for (std::size_t i = 0; i < ap.pools.size(); ++i) avg_pool(l, i, ap.pools[i]);
      }
    }
    return std::move(enc_);
  }

 private:
  struct Affine {
    std::vector<Term> terms;  // over previous-layer outputs
    std::vector<std::size_t> sources;
    double bias = 0.0;
  };

  Affine affine(std::size_t l, std::size_t i, const DenseLayer& d) const {
    Affine a;
    const auto& prev = enc_.outputs[l - 1];
    for (std::size_t j = 0; j < d.inputs(); ++j) {
      const double w = d.scale * d.weights(j, i);
      if (w == 0.0) continue;
      a.terms.push_back({prev[j], w});
      a.sources.push_back(j);
    }
    a.bias = d.scale * d.bias[i];
    return a;
  }

  static std::vector<Term> with(std::vector<Term> terms, std::initializer_list<Term> extra) {
    terms.insert(terms.end(), extra.begin(), extra.end());
    return terms;
  }

  static std::vector<Term> negated(std::vector<Term> terms) {
    for (Term& t : terms) t.coef = -t.coef;
    return terms;
  }

  void finish_unit(std::size_t l, NeuronEncoding ne, FixedState fs) {
    enc_.outputs[l].push_back(ne.x);
    enc_.neurons[l].push_back(std::move(ne));
    fixed_[l].push_back(fs);
  }

  void dense_unit(std::size_t l, std::size_t i, const DenseLayer& d) {
    MipModel& m = enc_.model;
    const std::string t = tag(l, i);
    const VarMeta out_meta{int(l), int(i), VarRole::UnitOutput};
    Affine a = affine(l, i, d);
    NeuronEncoding ne;

    if (d.activation == Activation::Linear) {
      ne.x = m.add_continuous("x" + t, -kInf, kInf, out_meta);
      m.add_constraint("linear" + t, with(negated(a.terms), {{ne.x, 1.0}}), Sense::Equal, a.bias);
      finish_unit(l, std::move(ne), FixedState::None);
      return;
    }
    if (a.terms.empty()) {
      // Constant unit: output is max{0, b}.
      const double c = std::max(0.0, a.bias);
      ne.x = m.add_continuous("x" + t, c, c, out_meta);
      ne.simplified = true;
      finish_unit(l, std::move(ne), c > 0.0 ? FixedState::Active : FixedState::Inactive);
      return;
    }

    const NeuronBounds& nb = bounds_.at(l, i);
    const bool cheng = spec_.bound_method == BoundMethod::Cheng;
    const bool simplify = spec_.simplify_stable || cheng;
    if (simplify && nb.stability == Stability::StablyInactive) {
      ne.x = m.add_continuous("x" + t, 0.0, 0.0, out_meta);
      ne.simplified = true;
      finish_unit(l, std::move(ne), FixedState::Inactive);
      return;
    }
    if (simplify && nb.stability == Stability::StablyActive) {
      ne.x = m.add_continuous("x" + t, 0.0, kInf, out_meta);
      ne.simplified = true;
      m.add_constraint("affine" + t, with(negated(a.terms), {{ne.x, 1.0}}), Sense::Equal, a.bias);
      finish_unit(l, std::move(ne), FixedState::Active);
      return;
    }

    switch (spec_.relu) {
      case ReluFormulation::BigM:
      case ReluFormulation::BigMHullCuts:
        big_m(l, i, a, nb, ne, cheng);
        break;
      case ReluFormulation::Extended:
        extended(l, i, d, a, nb, ne);
        break;
      case ReluFormulation::Disjunctive:
        disjunctive(l, i, d, a, ne);
        break;
    }
    finish_unit(l, std::move(ne), FixedState::None);
  }

  void big_m(std::size_t l, std::size_t i, const Affine& a, const NeuronBounds& nb, NeuronEncoding& ne,
             bool cheng) {
    MipModel& m = enc_.model;
    const std::string t = tag(l, i);
    // With Cheng bounds the two gating constraints get separate constants: -L for the lower
    // side and U for the upper side.
    double m_ub, m_act;
    if (cheng) {
      m_ub = std::max(0.0, -nb.pre.lo);
      m_act = std::max(0.0, nb.pre.hi);
    } else {
      m_ub = m_act = std::max({0.0, nb.big_m, -nb.pre.lo, nb.pre.hi});
    }
    if (!std::isfinite(m_ub) || !std::isfinite(m_act))
      throw EncodingError("unit" + t + " needs a finite big-M");
    ne.x = m.add_continuous("x" + t, 0.0, kInf, VarMeta{int(l), int(i), VarRole::UnitOutput});
    ne.z = m.add_binary("z" + t, VarMeta{int(l), int(i), VarRole::Indicator});
    m.add_constraint("relu_lb" + t, with(negated(a.terms), {{ne.x, 1.0}}), Sense::GreaterEqual, a.bias);
    m.add_constraint("relu_ub" + t, with(negated(a.terms), {{ne.x, 1.0}, {ne.z, m_ub}}), Sense::LessEqual,
                     a.bias + m_ub);
    m.add_constraint("relu_act" + t, {{ne.x, 1.0}, {ne.z, -m_act}}, Sense::LessEqual, 0.0);

    if (spec_.relu == ReluFormulation::BigMHullCuts) {
      HullNeuron h;
      h.layer = l;
      h.neuron = i;
      h.y = ne.x;
      h.z = ne.z;
      h.bias = a.bias;
      for (std::size_t k = 0; k < a.terms.size(); ++k) {
        h.inputs.push_back(a.terms[k].var);
        h.weights.push_back(a.terms[k].coef);
        h.input_bounds.push_back(bounds_.output(l - 1, a.sources[k]));
      }
      enc_.hull.push_back(std::move(h));
    }
  }

  void extended(std::size_t l, std::size_t i, const DenseLayer& d, const Affine& a, const NeuronBounds& nb,
                NeuronEncoding& ne) {
    MipModel& m = enc_.model;
    const std::string t = tag(l, i);
    const double mp = nb.m_plus, mm = nb.m_minus;
    if (!std::isfinite(mp) || !std::isfinite(mm)) throw EncodingError("unit" + t + " needs finite M+/M-");
    ne.x = m.add_continuous("x" + t, 0.0, mp, VarMeta{int(l), int(i), VarRole::UnitOutput});
    ne.xbar = m.add_continuous("xb" + t, 0.0, mm, VarMeta{int(l), int(i), VarRole::Complement});
    ne.z = m.add_binary("z" + t, VarMeta{int(l), int(i), VarRole::Indicator});
    m.add_constraint("ext_split" + t, with(a.terms, {{ne.x, -1.0}, {ne.xbar, 1.0}}), Sense::Equal, -a.bias);
    m.add_constraint("ext_pos" + t, {{ne.x, 1.0}, {ne.z, -mp}}, Sense::LessEqual, 0.0);
    m.add_constraint("ext_neg" + t, {{ne.xbar, 1.0}, {ne.z, mm}}, Sense::LessEqual, mm);

    if (!spec_.valid_inequalities || l < 2) return;
    const auto* prev = std::get_if<DenseLayer>(&net_.layer(l - 1));
    if (!prev || prev->activation != Activation::Relu) return;
    // A unit with nonpositive bias can only be active through some active predecessor with a
    // positive weight; symmetrically for inactivity with nonnegative bias.
    for (int side = 0; side < 2; ++side) {
      if (side == 0 && a.bias > 0.0) continue;
      if (side == 1 && a.bias < 0.0) continue;
      std::vector<Term> terms;
      bool trivially_true = false;
      for (std::size_t j = 0; j < d.inputs(); ++j) {
        const double w = d.scale * d.weights(j, i);
        if (side == 0 ? !(w > 0.0) : !(w < 0.0)) continue;
        if (fixed_[l - 1][j] == FixedState::Active) trivially_true = true;
        const VarId zj = enc_.neurons[l - 1][j].z;
        if (zj != kNoVar) terms.push_back({zj, 1.0});
      }
      if (trivially_true) continue;
      if (side == 0) {
        // z_i <= sum z_j
        for (Term& tm : terms) tm.coef = -1.0;
        terms.push_back({ne.z, 1.0});
        m.add_constraint("vi_active" + t, std::move(terms), Sense::LessEqual, 0.0);
      } else {
        // 1 - z_i <= sum z_j
        terms.push_back({ne.z, 1.0});
        m.add_constraint("vi_inactive" + t, std::move(terms), Sense::GreaterEqual, 1.0);
      }
    }
  }

  // Interval of sum_{j in part} w_j x_j over the previous layer's output box.
  Interval partition_interval(std::size_t l, std::size_t i, const DenseLayer& d,
                              const std::vector<std::size_t>& part) const {
    Interval iv{0.0, 0.0};
    for (std::size_t j : part) {
      const double w = d.scale * d.weights(j, i);
      if (w == 0.0) continue;
      const Interval in = bounds_.output(l - 1, j);
      iv.lo += std::min(w * in.lo, w * in.hi);
      iv.hi += std::max(w * in.lo, w * in.hi);
    }
    return iv;
  }

  // Ranges of each partition sum under the inactive (y + b <= 0) and active (y + b >= 0)
  // disjuncts, from LPs over the big-M relaxation of the preceding layers.
  void lp_partition_bounds(std::size_t l, std::size_t i, const DenseLayer& d, const Affine& a,
                           const std::vector<std::vector<std::size_t>>& parts,
                           std::vector<Interval>& in_a, std::vector<Interval>& in_b) {
    if (!prefix_ || prefix_layer_ != l) {
      FormulationSpec ps;
      ps.relu = ReluFormulation::BigM;
      ps.bound_method = spec_.bound_method == BoundMethod::Cheng ? BoundMethod::Cheng : BoundMethod::Bunel;
      ps.simplify_stable = true;
      prefix_ = std::make_unique<Encoding>(encode_network(net_, bounds_, ps, l - 1));
      prefix_layer_ = l;
    }
    const auto& prev = prefix_->outputs[l - 1];
    for (int side = 0; side < 2; ++side) {
      MipModel mm = prefix_->model;
      std::vector<Term> row;
      for (std::size_t k = 0; k < a.terms.size(); ++k) row.push_back({prev[a.sources[k]], a.terms[k].coef});
      mm.add_constraint("disjunct_side", row, side == 0 ? Sense::LessEqual : Sense::GreaterEqual, -a.bias);
      LpEngine lp(mm);
      for (std::size_t k = 0; k < parts.size(); ++k) {
        std::vector<Term> obj;
        for (std::size_t j : parts[k]) {
          const double w = d.scale * d.weights(j, i);
          if (w != 0.0) obj.push_back({prev[j], w});
        }
        if (obj.empty()) {
          (side == 0 ? in_a : in_b)[k] = {0.0, 0.0};
          continue;
        }
        double ext[2];
        bool ok = true;
        for (int s = 0; s < 2 && ok; ++s) {
          lp.set_objective(s == 0 ? ObjSense::Minimize : ObjSense::Maximize, obj);
          ok = lp.solve() == LpEngine::Status::Optimal;
          if (ok) ext[s] = lp.objective_value();
        }
        if (!ok) continue;  // keep the interval range
        Interval& target = (side == 0 ? in_a : in_b)[k];
        const double pad = 1e-10;
        target.lo = std::max(target.lo, ext[0] - pad * std::max(1.0, std::abs(ext[0])));
        target.hi = std::min(target.hi, ext[1] + pad * std::max(1.0, std::abs(ext[1])));
        if (target.lo > target.hi) target = partition_interval(l, i, d, parts[k]);
      }
    }
  }

  void disjunctive(std::size_t l, std::size_t i, const DenseLayer& d, const Affine& a, NeuronEncoding& ne) {
    MipModel& m = enc_.model;
    const std::string t = tag(l, i);
    const int K = spec_.partitions;
    ne.partitions = equal_partitions(d.inputs(), K);
    std::vector<Interval> in_a, in_b;
    for (const auto& part : ne.partitions) {
      in_a.push_back(partition_interval(l, i, d, part));
      in_b.push_back(in_a.back());
    }
    if (spec_.partition_bounds == PartitionBounds::Lp) lp_partition_bounds(l, i, d, a, ne.partitions, in_a, in_b);

    // z = 1 selects the inactive disjunct.
    ne.x = m.add_continuous("x" + t, 0.0, kInf, VarMeta{int(l), int(i), VarRole::UnitOutput});
    ne.z = m.add_binary("z" + t, VarMeta{int(l), int(i), VarRole::Indicator});
    const auto& prev = enc_.outputs[l - 1];
    std::vector<Term> sum_a, sum_b;
    for (int k = 0; k < K; ++k) {
      const std::string tk = K == 1 ? t : t + "_k" + std::to_string(k);
      const Interval& ra = in_a[k];
      const Interval& rb = in_b[k];
      const VarId ya = m.add_continuous("ya" + tk, std::min(0.0, ra.lo), std::max(0.0, ra.hi),
                                        VarMeta{int(l), int(i), VarRole::DisjunctA});
      const VarId yb = m.add_continuous("yb" + tk, std::min(0.0, rb.lo), std::max(0.0, rb.hi),
                                        VarMeta{int(l), int(i), VarRole::DisjunctB});
      ne.ya.push_back(ya);
      ne.yb.push_back(yb);
      std::vector<Term> part_terms;
      for (std::size_t j : ne.partitions[k]) {
        const double w = d.scale * d.weights(j, i);
        if (w != 0.0) part_terms.push_back({prev[j], w});
      }
      m.add_constraint("disj_split" + tk, with(part_terms, {{ya, -1.0}, {yb, -1.0}}), Sense::Equal, 0.0);
      m.add_constraint("disj_a_lo" + tk, {{ya, 1.0}, {ne.z, -ra.lo}}, Sense::GreaterEqual, 0.0);
      m.add_constraint("disj_a_hi" + tk, {{ya, 1.0}, {ne.z, -ra.hi}}, Sense::LessEqual, 0.0);
      m.add_constraint("disj_b_lo" + tk, {{yb, 1.0}, {ne.z, rb.lo}}, Sense::GreaterEqual, rb.lo);
      m.add_constraint("disj_b_hi" + tk, {{yb, 1.0}, {ne.z, rb.hi}}, Sense::LessEqual, rb.hi);
      sum_a.push_back({ya, 1.0});
      sum_b.push_back({yb, 1.0});
    }
    const double b = a.bias;
    m.add_constraint("disj_inactive" + t, with(sum_a, {{ne.z, b}}), Sense::LessEqual, 0.0);
    m.add_constraint("disj_active" + t, with(sum_b, {{ne.z, -b}}), Sense::GreaterEqual, -b);
    m.add_constraint("disj_out" + t, with(sum_b, {{ne.z, -b}, {ne.x, -1.0}}), Sense::Equal, -b);
  }

  void max_pool(std::size_t l, std::size_t i, const std::vector<std::size_t>& pool) {
    MipModel& m = enc_.model;
    const std::string t = tag(l, i);
    const auto& prev = enc_.outputs[l - 1];
    double u_max = -kInf, l_max = -kInf;
    for (std::size_t j : pool) {
      u_max = std::max(u_max, bounds_.output(l - 1, j).hi);
      l_max = std::max(l_max, bounds_.output(l - 1, j).lo);
    }
    if (!std::isfinite(u_max)) throw EncodingError("pool" + t + " needs finite member bounds");
    NeuronEncoding ne;
    ne.x = m.add_continuous("x" + t, l_max, u_max, VarMeta{int(l), int(i), VarRole::UnitOutput});
    std::vector<Term> one;
    for (std::size_t p = 0; p < pool.size(); ++p) {
      const std::string tp = t + "_p" + std::to_string(p);
      const VarId xj = prev[pool[p]];
      const double lj = bounds_.output(l - 1, pool[p]).lo;
      if (!std::isfinite(lj)) throw EncodingError("pool" + t + " needs finite member bounds");
      const VarId delta = m.add_binary("delta" + tp, VarMeta{int(l), int(i), VarRole::PoolIndicator});
      ne.delta.push_back(delta);
      const double span = u_max - lj;
      m.add_constraint("pool_ge" + tp, {{ne.x, 1.0}, {xj, -1.0}}, Sense::GreaterEqual, 0.0);
      m.add_constraint("pool_le" + tp, {{ne.x, 1.0}, {xj, -1.0}, {delta, span}}, Sense::LessEqual, span);
      one.push_back({delta, 1.0});
    }
    m.add_constraint("pool_one" + t, std::move(one), Sense::Equal, 1.0);
    finish_unit(l, std::move(ne), FixedState::None);
  }

  void avg_pool(std::size_t l, std::size_t i, const std::vector<std::size_t>& pool) {
    MipModel& m = enc_.model;
    const std::string t = tag(l, i);
    const auto& prev = enc_.outputs[l - 1];
    NeuronEncoding ne;
    ne.x = m.add_continuous("x" + t, -kInf, kInf, VarMeta{int(l), int(i), VarRole::UnitOutput});
    std::vector<Term> terms{{ne.x, 1.0}};
    const double k = static_cast<double>(pool.size());
    for (std::size_t j : pool) terms.push_back({prev[j], -1.0 / k});
    m.add_constraint("pool_avg" + t, std::move(terms), Sense::Equal, 0.0);
    finish_unit(l, std::move(ne), FixedState::None);
  }

  const Network& net_;
  const BoundSet& bounds_;
  const FormulationSpec& spec_;
  Encoding enc_;
  std::vector<std::vector<FixedState>> fixed_;
  std::unique_ptr<Encoding> prefix_;
  std::size_t prefix_layer_ = 0;
};

}  // namespace

Encoding encode_network(const Network& net, const BoundSet& bounds, const FormulationSpec& spec,
                        std::optional<std::size_t> num_layers) {
  spec.validate();
  const std::size_t L = num_layers.value_or(net.num_layers());
  if (L > net.num_layers()) throw DimensionError("cannot encode more layers than the network has");
  if (bounds.layers.size() < L || bounds.input.size() != net.input_dim())
    throw DimensionError("bounds do not match the network");
  for (std::size_t l = 1; l <= L; ++l)
    if (bounds.layers[l - 1].size() != net.width(l))
      throw DimensionError("bounds for layer " + std::to_string(l) + " have the wrong width");
  Encoder e(net, bounds, spec);
  return e.run(L);
}

std::vector<double> assignment_from_forward(const Encoding& enc, const Network& net,
                                            std::span<const double> x0) {
  const Activations acts = forward(net, x0);
  std::vector<double> a(enc.model.num_variables(), 0.0);
  for (std::size_t j = 0; j < x0.size(); ++j) a[enc.outputs[0][j]] = x0[j];
  const bool disj = enc.spec.relu == ReluFormulation::Disjunctive;
  for (std::size_t l = 1; l < enc.neurons.size(); ++l) {
    const Layer& layer = net.layer(l);
    const auto* d = std::get_if<DenseLayer>(&layer);
    const auto* mp = std::get_if<MaxPoolLayer>(&layer);
    for (std::size_t i = 0; i < enc.neurons[l].size(); ++i) {
      const NeuronEncoding& ne = enc.neurons[l][i];
      const double y = acts.pre[l][i];
      a[ne.x] = acts.post[l][i];
      const bool active = y > 0.0;
      if (ne.z != kNoVar) a[ne.z] = disj ? (active ? 0.0 : 1.0) : (active ? 1.0 : 0.0);
      if (ne.xbar != kNoVar) a[ne.xbar] = std::max(0.0, -y);
      if (d && !ne.ya.empty()) {
        for (std::size_t k = 0; k < ne.partitions.size(); ++k) {
          double part = 0.0;
          for (std::size_t j : ne.partitions[k]) part += d->scale * d->weights(j, i) * acts.post[l - 1][j];
          a[ne.ya[k]] = active ? 0.0 : part;
          a[ne.yb[k]] = active ? part : 0.0;
        }
      }
      if (mp && !ne.delta.empty()) {
        const auto& pool = mp->pools[i];
        std::size_t best = 0;
        for (std::size_t p = 1; p < pool.size(); ++p)
          if (acts.post[l - 1][pool[p]] > acts.post[l - 1][pool[best]]) best = p;
        a[ne.delta[best]] = 1.0;
      }
    }
  }
  return a;
}

SolveResult solve_encoding(const Encoding& enc, SolverParams params) {
  if (enc.spec.relu != ReluFormulation::BigMHullCuts) return solve_mip(enc.model, params);
  params.root_cut_rounds = enc.spec.max_rounds;
  params.node_cut_rounds = enc.spec.max_rounds;
  params.max_cuts_per_round = enc.spec.max_cuts_per_round;
  HullCutSeparator sep(enc.hull);
  return solve_mip(enc.model, params, &sep);
}

}  // namespace relumip
