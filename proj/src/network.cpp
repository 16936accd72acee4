#include "relumip/network.hpp"

#include <algorithm>
#include <string>

#include "relumip/errors.hpp"

namespace relumip {

namespace {

std::string layer_tag(std::size_t l) { return "layer " + std::to_string(l); }

void validate_pools(const std::vector<std::vector<std::size_t>>& pools, std::size_t input_size,
                    std::size_t l) {
  std::vector<bool> seen(input_size, false);
  for (const auto& pool : pools) {
    if (pool.empty()) throw DimensionError(layer_tag(l) + ": empty pool");
    for (std::size_t idx : pool) {
      if (idx >= input_size)
        throw DimensionError(layer_tag(l) + ": pool index " + std::to_string(idx) +
                             " out of range for input size " + std::to_string(input_size));
      if (seen[idx])
        throw DimensionError(layer_tag(l) + ": pool index " + std::to_string(idx) +
                             " appears in more than one pool");
      seen[idx] = true;
    }
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    throw DimensionError(layer_tag(l) + ": pools do not cover every input");
}

}  // namespace

std::size_t layer_inputs(const Layer& layer) {
  return std::visit(
      [](const auto& ly) -> std::size_t {
        using T = std::decay_t<decltype(ly)>;
        if constexpr (std::is_same_v<T, DenseLayer>)
          return ly.inputs();
        else
          return ly.input_size;
      },
      layer);
}

std::size_t layer_outputs(const Layer& layer) {
  return std::visit(
      [](const auto& ly) -> std::size_t {
        using T = std::decay_t<decltype(ly)>;
        if constexpr (std::is_same_v<T, DenseLayer>)
          return ly.outputs();
        else
          return ly.pools.size();
      },
      layer);
}

double apply_activation(Activation act, double y, double step_offset) {
  switch (act) {
    case Activation::Relu:
      return y > 0.0 ? y : 0.0;
    case Activation::Linear:
      return y;
    case Activation::Step:
      return y + step_offset >= 0.0 ? 1.0 : 0.0;
    case Activation::Sign:
      return y + step_offset >= 0.0 ? 1.0 : -1.0;
  }
  return y;
}

const char* activation_name(Activation act) {
  switch (act) {
    case Activation::Relu:
      return "relu";
    case Activation::Linear:
      return "linear";
    case Activation::Step:
      return "step";
    case Activation::Sign:
      return "sign";
  }
  return "?";
}

Network::Network(std::size_t input_dim, std::vector<Interval> input_box, std::vector<Layer> layers)
    : input_dim_(input_dim), input_box_(std::move(input_box)), layers_(std::move(layers)) {
  if (input_dim_ == 0) throw DimensionError("input_dim must be positive");
  if (input_box_.size() != input_dim_)
    throw DimensionError("input_box has " + std::to_string(input_box_.size()) +
                         " entries, expected " + std::to_string(input_dim_));
  for (std::size_t i = 0; i < input_box_.size(); ++i) {
    if (!(input_box_[i].lo <= input_box_[i].hi))
      throw IntervalError("input_box entry " + std::to_string(i) + " has lo > hi");
  }
  if (layers_.empty()) throw DimensionError("network has no layers");

  std::size_t prev = input_dim_;
  for (std::size_t l = 1; l <= layers_.size(); ++l) {
    const Layer& layer = layers_[l - 1];
    if (layer_inputs(layer) != prev)
      throw DimensionError(layer_tag(l) + " declares " + std::to_string(layer_inputs(layer)) +
                           " inputs but the previous layer produces " + std::to_string(prev));
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      if (dense->bias.size() != dense->outputs())
        throw DimensionError(layer_tag(l) + ": bias length " + std::to_string(dense->bias.size()) +
                             " does not match " + std::to_string(dense->outputs()) + " outputs");
      if (dense->outputs() == 0) throw DimensionError(layer_tag(l) + " has no outputs");
    } else if (const auto* mp = std::get_if<MaxPoolLayer>(&layer)) {
      validate_pools(mp->pools, mp->input_size, l);
    } else if (const auto* ap = std::get_if<AvgPoolLayer>(&layer)) {
      validate_pools(ap->pools, ap->input_size, l);
    }
    prev = layer_outputs(layer);
  }
}

std::size_t Network::width(std::size_t l) const {
  if (l == 0) return input_dim_;
  return layer_outputs(layers_.at(l - 1));
}

Activations forward(const Network& net, std::span<const double> x0) {
  if (x0.size() != net.input_dim())
    throw DimensionError("input has length " + std::to_string(x0.size()) + ", expected " +
                         std::to_string(net.input_dim()));
  Activations acts;
  acts.pre.emplace_back(x0.begin(), x0.end());
  acts.post.emplace_back(x0.begin(), x0.end());

  for (const Layer& layer : net.layers()) {
    const std::vector<double>& in = acts.post.back();
    std::vector<double> pre;
    std::vector<double> post;
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      const std::size_t n_out = dense->outputs();
      pre.assign(n_out, 0.0);
      for (std::size_t i = 0; i < n_out; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < in.size(); ++j) acc += dense->weights(j, i) * in[j];
        pre[i] = dense->scale * (acc + dense->bias[i]);
      }
      post.resize(n_out);
      for (std::size_t i = 0; i < n_out; ++i)
        post[i] = apply_activation(dense->activation, pre[i], dense->step_offset);
    } else if (const auto* mp = std::get_if<MaxPoolLayer>(&layer)) {
      for (const auto& pool : mp->pools) {
        double best = in[pool.front()];
        for (std::size_t idx : pool) best = std::max(best, in[idx]);
        post.push_back(best);
      }
      pre = post;
    } else if (const auto* ap = std::get_if<AvgPoolLayer>(&layer)) {
      for (const auto& pool : ap->pools) {
        // Constant pools must come back exactly, so skip the division when all members agree.
        const double first = in[pool.front()];
        bool constant = true;
        double acc = 0.0;
        for (std::size_t idx : pool) {
          acc += in[idx];
          constant = constant && in[idx] == first;
        }
        post.push_back(constant ? first : acc / static_cast<double>(pool.size()));
      }
      pre = post;
    }
    acts.pre.push_back(std::move(pre));
    acts.post.push_back(std::move(post));
  }
  return acts;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace relumip
