#include "relumip/training.hpp"

#include <algorithm>
#include <cmath>

#include "relumip/errors.hpp"
#include "relumip/json_util.hpp"

namespace relumip {

using nlohmann::json;

Dataset parse_dataset(const std::string& text) {
  const json doc = parse_json(text, "dataset");
  if (!doc.is_object()) throw ParseError("dataset must be an object");
  Dataset d;
  try {
    d.inputs = require(doc, "inputs").get<std::vector<std::vector<double>>>();
    d.labels = require(doc, "labels").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset: ") + e.what());
  }
  if (d.inputs.size() != d.labels.size()) throw ParseError("dataset: inputs and labels differ in length");
  for (const auto& x : d.inputs)
    if (x.size() != d.inputs.front().size()) throw ParseError("dataset: ragged inputs");
  return d;
}

Dataset load_dataset(const std::filesystem::path& path) { return parse_dataset(read_text_file(path)); }

std::string dataset_to_string(const Dataset& d) {
  json j;
  j["inputs"] = d.inputs;
  j["labels"] = d.labels;
  return j.dump(2) + "\n";
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) { write_text_file(path, dataset_to_string(d)); }

const char* loss_name(Loss l) {
  switch (l) {
    case Loss::L1:
      return "l1";
    case Loss::Hinge:
      return "hinge";
    case Loss::Squared:
      return "squared";
  }
  return "?";
}

Loss parse_loss(const std::string& s) {
  for (Loss l : {Loss::L1, Loss::Hinge, Loss::Squared})
    if (s == loss_name(l)) return l;
  throw ParseError("unknown loss '" + s + "'");
}

void TrainingSpec::validate() const {
  if (arch.size() < 2) throw ModelError("architecture needs an input and an output size");
  for (std::size_t n : arch)
    if (n == 0) throw ModelError("layer sizes must be positive");
  if (P < 1) throw ModelError("P must be a positive integer");
  if (!(radius > 0)) throw ModelError("input radius must be positive");
  if (!(epsilon > 0)) throw ModelError("epsilon must be positive");
  for (std::size_t s = 0; s < data.size(); ++s) {
    if (data.inputs[s].size() != arch.front())
      throw DimensionError("sample " + std::to_string(s) + " has " + std::to_string(data.inputs[s].size()) +
                           " features, architecture expects " + std::to_string(arch.front()));
    if (data.labels[s] >= num_classes()) throw ModelError("sample " + std::to_string(s) + " has an invalid label");
    if (variant == TrainingVariant::BinaryStep)
      for (double v : data.inputs[s])
        if (std::abs(v) > radius) throw ModelError("sample " + std::to_string(s) + " lies outside [-r, r]");
  }
}

double training_target(const TrainingSpec& spec, std::size_t label, std::size_t output) {
  const bool hot = spec.arch.back() == 1 ? label == 1 : label == output;
  if (spec.loss == Loss::Hinge) return hot ? 1.0 : -1.0;
  return hot ? 1.0 : 0.0;
}

double sample_loss(const TrainingSpec& spec, const std::vector<double>& outputs, std::size_t label) {
  double loss = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const double t = training_target(spec, label, i);
    switch (spec.loss) {
      case Loss::L1:
        loss += std::abs(outputs[i] - t);
        break;
      case Loss::Hinge:
        loss += std::max(0.0, 0.5 - t * outputs[i]);
        break;
      case Loss::Squared:
        loss += (outputs[i] - t) * (outputs[i] - t);
        break;
    }
  }
  return loss;
}

std::size_t predict_class(const TrainingSpec& spec, const std::vector<double>& outputs) {
  if (outputs.size() == 1) return outputs[0] >= (spec.loss == Loss::Hinge ? 0.0 : 0.5) ? 1 : 0;
  return argmax(outputs);
}

namespace {

// Weight row index: r0 is the bias, r{j+1} multiplies unit j of the previous layer.
std::string wname(std::size_t l, std::size_t r, std::size_t i) {
  return "w_l" + std::to_string(l) + "_r" + std::to_string(r) + "_c" + std::to_string(i);
}
std::string sfx(std::size_t s) { return "_s" + std::to_string(s); }
std::string unit(std::size_t l, std::size_t i) { return "_l" + std::to_string(l) + "_n" + std::to_string(i); }
std::string prod(std::size_t l, std::size_t r, std::size_t i) {
  return "_l" + std::to_string(l) + "_r" + std::to_string(r) + "_c" + std::to_string(i);
}

class TrainingEncoder {
 public:
  explicit TrainingEncoder(const TrainingSpec& spec) : spec_(spec), m_("training") {
    spec.validate();
    if (spec.loss == Loss::Squared)
      throw ModelError("squared loss needs a quadratic objective; only l1 and hinge are supported");
    binarized_ = spec.variant == TrainingVariant::Binarized;
    P_ = double(spec.P);
    const std::size_t L = spec.num_layers();
    w_.resize(L + 1);
    for (std::size_t l = 1; l <= L; ++l) {
      w_[l].assign(spec.arch[l - 1] + 1, std::vector<VarId>(spec.arch[l]));
      for (std::size_t r = 0; r <= spec.arch[l - 1]; ++r)
        for (std::size_t i = 0; i < spec.arch[l]; ++i) {
          const VarMeta meta{int(l), int(i), VarRole::TrainingWeight};
          w_[l][r][i] = binarized_ ? m_.add_variable(wname(l, r, i), VarKind::Integer, -1.0, 1.0, meta)
                                   : m_.add_continuous(wname(l, r, i), -1.0, 1.0, meta);
        }
    }
  }

  MipModel run() {
    std::vector<Term> obj;
    for (std::size_t s = 0; s < spec_.data.size(); ++s) encode_sample(s, obj);
    m_.set_objective(ObjSense::Minimize, std::move(obj));
    return std::move(m_);
  }

 private:
  // Physical weight coefficient of the weight variable.
  double wscale() const { return binarized_ ? P_ : 1.0; }

  double big_m(std::size_t l) const {
    const double n = double(spec_.arch[l - 1]);
    if (l == 1) {
      if (!binarized_) return n * spec_.radius + 1.0;
      double mx = 1.0;
      for (const auto& x : spec_.data.inputs)
        for (double v : x) mx = std::max(mx, std::abs(v));
      return P_ * (n * mx + 1.0);
    }
    return binarized_ ? P_ * (n + 1.0) : n + 1.0;
  }

  void encode_sample(std::size_t s, std::vector<Term>& obj) {
    const std::size_t L = spec_.num_layers();
    const std::string ss = sfx(s);
    const auto& x0 = spec_.data.inputs[s];
    std::vector<VarId> act;  // activation indicators of the previous layer

    for (std::size_t l = 1; l <= L; ++l) {
      const std::size_t nprev = spec_.arch[l - 1];
      std::vector<VarId> next;
      for (std::size_t i = 0; i < spec_.arch[l]; ++i) {
        std::vector<Term> sum{{w_[l][0][i], wscale()}};
        for (std::size_t j = 0; j < nprev; ++j) {
          const VarId w = w_[l][j + 1][i];
          if (l == 1) {
            sum.push_back({w, wscale() * x0[j]});
            continue;
          }
          const std::string pt = prod(l, j + 1, i) + ss;
          const VarId a = act[j];
          const double bound = binarized_ ? P_ : 1.0;
          const VarId u = m_.add_continuous("u" + pt, -bound, bound, VarMeta{int(l), int(i), VarRole::TrainingProduct});
          sum.push_back({u, 1.0});
          if (binarized_) {
            // u = w (2a - 1) with a binary and w in {-P, 0, P}
            m_.add_constraint("prod_a" + pt, {{u, 1.0}, {w, -P_}, {a, 2 * P_}}, Sense::LessEqual, 2 * P_);
            m_.add_constraint("prod_b" + pt, {{u, 1.0}, {w, P_}, {a, -2 * P_}}, Sense::LessEqual, 0.0);
            m_.add_constraint("prod_c" + pt, {{u, 1.0}, {w, -P_}, {a, -2 * P_}}, Sense::GreaterEqual, -2 * P_);
            m_.add_constraint("prod_d" + pt, {{u, 1.0}, {w, P_}, {a, 2 * P_}}, Sense::GreaterEqual, 0.0);
          } else {
            // u = w a with a binary and w in [-1, 1]
            m_.add_constraint("prod_a" + pt, {{u, 1.0}, {a, -1.0}}, Sense::LessEqual, 0.0);
            m_.add_constraint("prod_b" + pt, {{u, 1.0}, {a, 1.0}}, Sense::GreaterEqual, 0.0);
            m_.add_constraint("prod_c" + pt, {{u, 1.0}, {w, -1.0}, {a, 1.0}}, Sense::LessEqual, 1.0);
            m_.add_constraint("prod_d" + pt, {{u, 1.0}, {w, -1.0}, {a, -1.0}}, Sense::GreaterEqual, -1.0);
          }
        }

        const std::string ut = unit(l, i) + ss;
        if (l == L) {
          const VarId out = m_.add_continuous("x" + ut, -kInf, kInf, VarMeta{int(l), int(i), VarRole::UnitOutput});
          const double c = binarized_ ? 2.0 / (P_ * (double(nprev) + 1.0)) : 1.0;
          std::vector<Term> head;
          for (const Term& t : sum) head.push_back({t.var, c * t.coef});
          head.push_back({out, -1.0});
          m_.add_constraint("head" + ut, std::move(head), Sense::Equal, 0.0);
          add_loss(s, i, out, obj);
          continue;
        }

        const double M = big_m(l);
        const double eps = spec_.epsilon;
        const VarId a = m_.add_binary((binarized_ ? "z" : "x") + ut, VarMeta{int(l), int(i), VarRole::Indicator});
        next.push_back(a);
        // a = 0 forces sum <= -eps, a = 1 forces sum >= 0
        std::vector<Term> ub = sum;
        ub.push_back({a, binarized_ ? -(M + eps) : -M});
        m_.add_constraint("gate_ub" + ut, std::move(ub), Sense::LessEqual, -eps);
        std::vector<Term> lb = std::move(sum);
        lb.push_back({a, -M});
        m_.add_constraint("gate_lb" + ut, std::move(lb), Sense::GreaterEqual, -M);
      }
      act = std::move(next);
    }
  }

  void add_loss(std::size_t s, std::size_t i, VarId out, std::vector<Term>& obj) {
    const std::string et = "_n" + std::to_string(i) + sfx(s);
    const double t = training_target(spec_, spec_.data.labels[s], i);
    const VarId e = m_.add_continuous("e" + et, 0.0, kInf);
    if (spec_.loss == Loss::L1) {
      m_.add_constraint("loss_pos" + et, {{e, 1.0}, {out, -1.0}}, Sense::GreaterEqual, -t);
      m_.add_constraint("loss_neg" + et, {{e, 1.0}, {out, 1.0}}, Sense::GreaterEqual, t);
    } else {
      m_.add_constraint("hinge" + et, {{e, 1.0}, {out, t}}, Sense::GreaterEqual, 0.5);
    }
    obj.push_back({e, 1.0});
  }

  const TrainingSpec& spec_;
  MipModel m_;
  bool binarized_ = false;
  double P_ = 1.0;
  std::vector<std::vector<std::vector<VarId>>> w_;  // w_[l][r][i]
};

double value_of(const MipModel& m, const SolveResult& r, const std::string& name) {
  const auto v = m.find_variable(name);
  if (!v) throw ModelError("training model has no variable '" + name + "'");
  return r.incumbent.at(*v);
}

}  // namespace

MipModel encode_binary_training(const TrainingSpec& spec) {
  if (spec.variant != TrainingVariant::BinaryStep) throw ModelError("spec is not a binary-step training spec");
  return TrainingEncoder(spec).run();
}

MipModel encode_binarized_training(const TrainingSpec& spec) {
  if (spec.variant != TrainingVariant::Binarized) throw ModelError("spec is not a binarized training spec");
  return TrainingEncoder(spec).run();
}

MipModel encode_training(const TrainingSpec& spec) { return TrainingEncoder(spec).run(); }

TrainedNetwork decode_trained(const TrainingSpec& spec, const MipModel& model, const SolveResult& result) {
  if (!result.has_incumbent()) throw ModelError("training result has no incumbent");
  spec.validate();
  const bool binarized = spec.variant == TrainingVariant::Binarized;
  const double P = double(spec.P);
  const std::size_t L = spec.num_layers();

  std::vector<Layer> layers;
  for (std::size_t l = 1; l <= L; ++l) {
    DenseLayer d;
    d.weights = Matrix(spec.arch[l - 1], spec.arch[l]);
    d.bias.assign(spec.arch[l], 0.0);
    for (std::size_t i = 0; i < spec.arch[l]; ++i)
      for (std::size_t r = 0; r <= spec.arch[l - 1]; ++r) {
        double v = value_of(model, result, wname(l, r, i));
        v = binarized ? P * std::round(v) : std::clamp(v, -1.0, 1.0);
        if (r == 0)
          d.bias[i] = v;
        else
          d.weights(r - 1, i) = v;
      }
    if (l == L) {
      d.activation = Activation::Linear;
      if (binarized) d.scale = 2.0 / (P * (double(spec.arch[l - 1]) + 1.0));
    } else {
      d.activation = binarized ? Activation::Sign : Activation::Step;
      d.step_offset = spec.epsilon / 2;
    }
    layers.push_back(std::move(d));
  }
  double R = spec.radius;
  if (binarized) {
    R = 1.0;
    for (const auto& x : spec.data.inputs)
      for (double v : x) R = std::max(R, std::abs(v));
  }
  TrainedNetwork out{Network(spec.arch.front(), std::vector<Interval>(spec.arch.front(), {-R, R}), std::move(layers)),
                     {}};

  TrainingReport& rep = out.report;
  for (std::size_t s = 0; s < spec.data.size(); ++s) {
    const std::string ss = sfx(s);
    const Activations a = forward(out.net, spec.data.inputs[s]);
    std::vector<double> mip;
    for (std::size_t i = 0; i < spec.arch[L]; ++i) mip.push_back(value_of(model, result, "x" + unit(L, i) + ss));
    for (std::size_t i = 0; i < mip.size(); ++i)
      rep.max_output_diff = std::max(rep.max_output_diff, std::abs(mip[i] - a.output()[i]));

    // MIP activation of unit j in layer l, as the value the next layer multiplies.
    auto mip_act = [&](std::size_t l, std::size_t j) {
      const double ind = std::round(value_of(model, result, (binarized ? "z" : "x") + unit(l, j) + ss));
      return binarized ? 2 * ind - 1 : ind;
    };
    for (std::size_t l = 1; l < L; ++l)
      for (std::size_t j = 0; j < spec.arch[l]; ++j)
        if (mip_act(l, j) != a.post[l][j]) ++rep.activation_mismatches;
    for (std::size_t l = 2; l <= L; ++l)
      for (std::size_t i = 0; i < spec.arch[l]; ++i)
        for (std::size_t j = 0; j < spec.arch[l - 1]; ++j) {
          const double u = value_of(model, result, "u" + prod(l, j + 1, i) + ss);
          const double w = value_of(model, result, wname(l, j + 1, i)) * (binarized ? P : 1.0);
          const double raw = value_of(model, result, (binarized ? "z" : "x") + unit(l - 1, j) + ss);
          rep.max_product_error = std::max(rep.max_product_error, std::abs(u - w * (binarized ? 2 * raw - 1 : raw)));
        }

    const double loss = sample_loss(spec, a.output(), spec.data.labels[s]);
    const std::size_t pred = predict_class(spec, a.output());
    rep.mip_outputs.push_back(std::move(mip));
    rep.forward_outputs.push_back(a.output());
    rep.losses.push_back(loss);
    rep.predicted.push_back(pred);
    rep.total_loss += loss;
    if (pred != spec.data.labels[s]) ++rep.misclassified;
  }
  return out;
}

std::string training_report_to_string(const TrainingReport& r) {
  json j;
  j["mip_outputs"] = r.mip_outputs;
  j["forward_outputs"] = r.forward_outputs;
  j["losses"] = r.losses;
  j["predicted"] = r.predicted;
  j["activation_mismatches"] = r.activation_mismatches;
  j["misclassified"] = r.misclassified;
  j["max_output_diff"] = r.max_output_diff;
  j["max_product_error"] = r.max_product_error;
  j["total_loss"] = r.total_loss;
  return j.dump(2) + "\n";
}

}  // namespace relumip
