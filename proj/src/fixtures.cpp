#include "relumip/fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "relumip/errors.hpp"

namespace relumip {

double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

Network gen_network(const FixtureSpec& spec) {
  if (spec.sizes.size() < 2) throw ModelError("fixture needs at least an input and an output size");
  std::mt19937_64 rng(spec.seed);
  auto draw = [&] { return spec.weight_scale * (2.0 * uniform01(rng) - 1.0); };
  std::vector<Layer> layers;
  for (std::size_t l = 1; l < spec.sizes.size(); ++l) {
    DenseLayer d;
    d.weights = Matrix(spec.sizes[l - 1], spec.sizes[l]);
    for (std::size_t r = 0; r < d.weights.rows(); ++r)
      for (std::size_t c = 0; c < d.weights.cols(); ++c) d.weights(r, c) = draw();
    d.bias.resize(spec.sizes[l]);
    for (double& b : d.bias) b = draw();
    d.activation = l + 1 == spec.sizes.size() ? Activation::Linear : Activation::Relu;
    layers.push_back(std::move(d));
  }
  return Network(spec.sizes[0], std::vector<Interval>(spec.sizes[0], spec.input), std::move(layers));
}

Dataset xor4() { return Dataset{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0}}; }

Dataset random_separable(std::uint64_t seed, std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(seed);
  std::vector<double> normal(dim);
  for (double& w : normal) w = 2.0 * uniform01(rng) - 1.0;
  Dataset d;
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> x(dim);
    double dot = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      x[j] = 2.0 * uniform01(rng) - 1.0;
      dot += normal[j] * x[j];
    }
    d.inputs.push_back(std::move(x));
    d.labels.push_back(dot >= 0 ? 1 : 0);
  }
  return d;
}

namespace {

std::vector<double> draw_point(std::mt19937_64& rng, const Network& net) {
  std::vector<double> x;
  for (const Interval& iv : net.input_box()) x.push_back(iv.lo + uniform01(rng) * iv.width());
  return x;
}

}  // namespace

AttackFixture small_attack_fixture(std::uint64_t seed) {
  const FixtureSpec fs{seed, {4, 5, 5, 3}, 1.0, {0.0, 1.0}};
  Network net = gen_network(fs);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  AttackSpec spec;
  spec.reference = draw_point(rng, net);
  const std::vector<double> logits = forward(net, spec.reference).output();
  spec.true_class = argmax(logits);
  std::size_t runner_up = spec.true_class == 0 ? 1 : 0;
  for (std::size_t j = 0; j < logits.size(); ++j)
    if (j != spec.true_class && logits[j] > logits[runner_up]) runner_up = j;
  spec.target = runner_up;
  return {std::move(net), std::move(spec)};
}

std::vector<AttackFixture> small_attack_fixtures() {
  std::vector<AttackFixture> out;
  for (std::uint64_t seed : kSmallNetSeeds) out.push_back(small_attack_fixture(seed));
  return out;
}

AttackFixture large_attack_fixture() {
  const FixtureSpec fs{kLargeAttackSeed, {16, 12, 8, 4, 10}, 1.0, {0.0, 1.0}};
  Network net = gen_network(fs);
  std::mt19937_64 rng(fs.seed ^ 0x9e3779b97f4a7c15ULL);
  for (int tries = 0; tries < 100000; ++tries) {
    std::vector<double> x = draw_point(rng, net);
    if (argmax(forward(net, x).output()) == 0) {
      AttackSpec spec;
      spec.reference = std::move(x);
      spec.true_class = 0;
      return {std::move(net), std::move(spec)};
    }
  }
  throw ModelError("large attack fixture: no reference classified as 0");
}

Network tightening_fixture() {
  DenseLayer hidden;
  hidden.weights = Matrix(2, 2);
  hidden.weights(0, 0) = 1;
  hidden.weights(1, 0) = 1;
  hidden.weights(0, 1) = 1;
  hidden.weights(1, 1) = -1;
  hidden.bias = {0, 0};
  DenseLayer out;
  out.weights = Matrix(2, 1, 1.0);
  out.bias = {0};
  out.activation = Activation::Linear;
  return Network(2, {{-1, 1}, {-1, 1}}, {hidden, out});
}

std::vector<Interval> corner_enumeration_bounds(const Network& net) {
  const std::size_t n = net.input_dim();
  if (n > 12) throw ModelError("corner enumeration is limited to 12 inputs");
  const auto* d = std::get_if<DenseLayer>(&net.layer(1));
  if (!d) throw ModelError("corner enumeration needs a dense first layer");
  std::vector<Interval> out(d->outputs(), Interval{kInf, -kInf});
  std::vector<double> x(n);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    for (std::size_t j = 0; j < n; ++j) x[j] = (mask >> j) & 1 ? net.input_box()[j].hi : net.input_box()[j].lo;
    for (std::size_t i = 0; i < d->outputs(); ++i) {
      double y = d->bias[i];
      for (std::size_t j = 0; j < n; ++j) y += d->weights(j, i) * x[j];
      y *= d->scale;
      out[i].lo = std::min(out[i].lo, y);
      out[i].hi = std::max(out[i].hi, y);
    }
  }
  return out;
}

namespace {

std::size_t weight_count(const std::vector<std::size_t>& arch) {
  std::size_t c = 0;
  for (std::size_t l = 1; l < arch.size(); ++l) c += (arch[l - 1] + 1) * arch[l];
  return c;
}

double oracle_loss(Loss loss, const std::vector<double>& out, std::size_t label, std::size_t outputs) {
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const bool hot = outputs == 1 ? label == 1 : label == i;
    if (loss == Loss::L1)
      total += std::abs(out[i] - (hot ? 1.0 : 0.0));
    else if (loss == Loss::Hinge)
      total += std::max(0.0, 0.5 - (hot ? 1.0 : -1.0) * out[i]);
    else
      throw ModelError("weight search supports l1 and hinge losses");
  }
  return total;
}

// Evaluates a layered net where w is laid out per layer, per output unit: bias then inputs.
template <class Hidden>
std::vector<double> evaluate(const std::vector<std::size_t>& arch, const std::vector<double>& w,
                             const std::vector<double>& x0, Hidden hidden, double out_scale) {
  std::vector<double> x = x0;
  std::size_t k = 0;
  for (std::size_t l = 1; l < arch.size(); ++l) {
    std::vector<double> y(arch[l]);
    for (std::size_t i = 0; i < arch[l]; ++i) {
      double s = w[k++];
      for (std::size_t j = 0; j < arch[l - 1]; ++j) s += w[k++] * x[j];
      y[i] = l + 1 == arch.size() ? out_scale * s : hidden(s);
    }
    x = std::move(y);
  }
  return x;
}

template <class Hidden>
WeightSearchResult lattice_search(const std::vector<std::size_t>& arch, const Dataset& data, Loss loss,
                                  const std::vector<double>& levels, Hidden hidden, double out_scale) {
  const std::size_t nw = weight_count(arch);
  std::vector<std::size_t> digit(nw, 0);
  std::vector<double> w(nw, levels[0]);
  WeightSearchResult best;
  best.best_loss = kInf;
  while (true) {
    ++best.assignments;
    double total = 0.0;
    for (std::size_t s = 0; s < data.size() && total < best.best_loss; ++s)
      total += oracle_loss(loss, evaluate(arch, w, data.inputs[s], hidden, out_scale), data.labels[s], arch.back());
    if (total < best.best_loss) {
      best.best_loss = total;
      best.weights = w;
    }
    std::size_t c = 0;
    while (c < nw && ++digit[c] == levels.size()) {
      digit[c] = 0;
      w[c] = levels[0];
      ++c;
    }
    if (c == nw) break;
    w[c] = levels[digit[c]];
  }
  return best;
}

}  // namespace

WeightSearchResult ternary_weight_search(const std::vector<std::size_t>& arch, const Dataset& data, int P,
                                         Loss loss) {
  if (arch.size() < 2 || weight_count(arch) > 12) throw ModelError("ternary search is limited to 12 weights");
  if (P < 1) throw ModelError("P must be positive");
  const double p = P;
  const double scale = 2.0 / (p * (double(arch[arch.size() - 2]) + 1.0));
  return lattice_search(arch, data, loss, {-p, 0.0, p}, [](double s) { return s >= 0 ? 1.0 : -1.0; }, scale);
}

WeightSearchResult lattice_weight_search(const std::vector<std::size_t>& arch, const Dataset& data, Loss loss) {
  if (arch.size() < 2 || weight_count(arch) > 9) throw ModelError("lattice search is limited to 9 weights");
  return lattice_search(arch, data, loss, {-1.0, -0.5, 0.0, 0.5, 1.0},
                        [](double s) { return s >= 0 ? 1.0 : 0.0; }, 1.0);
}

}  // namespace relumip
