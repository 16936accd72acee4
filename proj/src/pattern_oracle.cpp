#include "relumip/pattern_oracle.hpp"

#include <cmath>
#include <string>

#include "relumip/bounds.hpp"
#include "relumip/errors.hpp"
#include "relumip/solver.hpp"

namespace relumip {

namespace {

struct Choice {
  std::size_t layer, unit;
  std::size_t arity;
};

}  // namespace

OracleResult pattern_oracle(const Network& net, const OracleProblem& problem) {
  if (problem.l1_reference && problem.sense != ObjSense::Minimize)
    throw ModelError("an L1 term needs a minimization objective");
  const BoundSet bounds = bounds_interval_bunel(net);

  std::vector<Choice> choices;
  std::size_t unstable = 0;
  for (std::size_t l = 1; l <= net.num_layers(); ++l) {
    const Layer& layer = net.layer(l);
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      if (d->activation != Activation::Relu && d->activation != Activation::Linear)
        throw ModelError("pattern oracle supports ReLU and linear layers only");
      if (d->activation != Activation::Relu) continue;
      for (std::size_t i = 0; i < d->outputs(); ++i)
        if (bounds.at(l, i).stability == Stability::Unstable) {
          choices.push_back({l, i, 2});
          ++unstable;
        }
    } else if (const auto* mp = std::get_if<MaxPoolLayer>(&layer)) {
      for (std::size_t i = 0; i < mp->pools.size(); ++i) {
        if (mp->pools[i].size() > 3) throw ModelError("pattern budget exceeded: pool wider than 3");
        if (mp->pools[i].size() > 1) choices.push_back({l, i, mp->pools[i].size()});
      }
    }
  }
  if (unstable > 20) throw ModelError("pattern budget exceeded: " + std::to_string(unstable) + " unstable units");

  // Regime per unit: for ReLU 1 = active, 0 = inactive; for max-pool the chosen member.
  std::vector<std::vector<std::size_t>> regime(net.num_layers() + 1);
  for (std::size_t l = 1; l <= net.num_layers(); ++l) {
    regime[l].assign(net.width(l), 0);
    if (const auto* d = std::get_if<DenseLayer>(&net.layer(l)))
      for (std::size_t i = 0; i < d->outputs(); ++i)
        regime[l][i] = bounds.at(l, i).stability == Stability::StablyInactive ? 0 : 1;
  }

  OracleResult best;
  std::vector<std::size_t> digit(choices.size(), 0);
  while (true) {
    for (std::size_t c = 0; c < choices.size(); ++c) regime[choices[c].layer][choices[c].unit] = digit[c];
    ++best.patterns;

    MipModel m("oracle");
    std::vector<std::vector<VarId>> out(net.num_layers() + 1);
    for (std::size_t j = 0; j < net.input_dim(); ++j)
      out[0].push_back(m.add_continuous("in" + std::to_string(j), net.input_box()[j].lo, net.input_box()[j].hi));
    for (std::size_t l = 1; l <= net.num_layers(); ++l) {
      const Layer& layer = net.layer(l);
      const std::string t = "_" + std::to_string(l) + "_";
      if (const auto* d = std::get_if<DenseLayer>(&layer)) {
        for (std::size_t i = 0; i < d->outputs(); ++i) {
          const std::string ti = t + std::to_string(i);
          std::vector<Term> y;
          for (std::size_t j = 0; j < d->inputs(); ++j) y.push_back({out[l - 1][j], d->scale * d->weights(j, i)});
          const double b = d->scale * d->bias[i];
          const VarId x = m.add_continuous("u" + ti, -kInf, kInf);
          out[l].push_back(x);
          const bool active = d->activation == Activation::Linear || regime[l][i] == 1;
          if (active) {
            std::vector<Term> eq = y;
            eq.push_back({x, -1.0});
            m.add_constraint("eq" + ti, eq, Sense::Equal, -b);
            if (d->activation == Activation::Relu) m.add_constraint("sign" + ti, y, Sense::GreaterEqual, -b);
          } else {
            m.set_bounds(x, 0.0, 0.0);
            m.add_constraint("sign" + ti, y, Sense::LessEqual, -b);
          }
        }
      } else if (const auto* mp = std::get_if<MaxPoolLayer>(&layer)) {
        for (std::size_t i = 0; i < mp->pools.size(); ++i) {
          const std::string ti = t + std::to_string(i);
          const auto& pool = mp->pools[i];
          const VarId chosen = out[l - 1][pool[regime[l][i]]];
          const VarId x = m.add_continuous("u" + ti, -kInf, kInf);
          out[l].push_back(x);
          m.add_constraint("eq" + ti, {{x, 1.0}, {chosen, -1.0}}, Sense::Equal, 0.0);
          for (std::size_t p = 0; p < pool.size(); ++p)
            if (p != regime[l][i])
              m.add_constraint("dom" + ti + "_" + std::to_string(p), {{chosen, 1.0}, {out[l - 1][pool[p]], -1.0}},
                               Sense::GreaterEqual, 0.0);
        }
      } else {
        const auto& ap = std::get<AvgPoolLayer>(layer);
        for (std::size_t i = 0; i < ap.pools.size(); ++i) {
          const std::string ti = t + std::to_string(i);
          const VarId x = m.add_continuous("u" + ti, -kInf, kInf);
          out[l].push_back(x);
          std::vector<Term> eq{{x, 1.0}};
          for (std::size_t j : ap.pools[i]) eq.push_back({out[l - 1][j], -1.0 / double(ap.pools[i].size())});
          m.add_constraint("eq" + ti, eq, Sense::Equal, 0.0);
        }
      }
    }

    const auto& outputs = out[net.num_layers()];
    auto linear = [&](const std::vector<double>& ci, const std::vector<double>& co) {
      std::vector<Term> t;
      for (std::size_t j = 0; j < ci.size(); ++j) t.push_back({out[0].at(j), ci[j]});
      for (std::size_t j = 0; j < co.size(); ++j) t.push_back({outputs.at(j), co[j]});
      return t;
    };
    for (std::size_t r = 0; r < problem.rows.size(); ++r)
      m.add_constraint("row" + std::to_string(r), linear(problem.rows[r].input, problem.rows[r].output),
                       problem.rows[r].sense, problem.rows[r].rhs);
    std::vector<Term> obj = linear(problem.input_coef, problem.output_coef);
    if (problem.l1_reference) {
      const auto& ref = *problem.l1_reference;
      for (std::size_t j = 0; j < ref.size(); ++j) {
        const VarId dj = m.add_continuous("dist" + std::to_string(j), 0.0, kInf);
        m.add_constraint("dp" + std::to_string(j), {{dj, 1.0}, {out[0].at(j), -1.0}}, Sense::GreaterEqual, -ref[j]);
        m.add_constraint("dn" + std::to_string(j), {{dj, 1.0}, {out[0].at(j), 1.0}}, Sense::GreaterEqual, ref[j]);
        obj.push_back({dj, 1.0});
      }
    }
    m.set_objective(problem.sense, obj);

    const SolveResult r = solve_lp(m);
    if (r.status == SolveStatus::Unbounded) throw ModelError("pattern oracle: unbounded pattern LP");
    if (r.status == SolveStatus::LimitNoIncumbent) throw ModelError("pattern oracle: LP failed");
    if (r.status == SolveStatus::Optimal) {
      const bool better = !best.feasible || (problem.sense == ObjSense::Minimize ? r.objective < best.optimum
                                                                                  : r.objective > best.optimum);
      if (better) {
        best.feasible = true;
        best.optimum = r.objective;
        best.input.clear();
        for (VarId v : out[0]) best.input.push_back(r.incumbent[v]);
      }
    }

    std::size_t c = 0;
    while (c < choices.size() && ++digit[c] == choices[c].arity) digit[c++] = 0;
    if (c == choices.size()) break;
  }
  return best;
}

}  // namespace relumip
