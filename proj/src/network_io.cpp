#include <fstream>
#include <sstream>

#include "json.hpp"
#include "relumip/errors.hpp"
#include "relumip/json_util.hpp"
#include "relumip/network.hpp"

namespace relumip {

using nlohmann::json;

namespace {

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "linear") return Activation::Linear;
  if (s == "step") return Activation::Step;
  if (s == "sign") return Activation::Sign;
  throw ParseError("unknown activation '" + s + "'");
}

std::vector<std::vector<std::size_t>> parse_pools(const json& j) {
  std::vector<std::vector<std::size_t>> pools;
  for (const auto& p : j) {
    std::vector<std::size_t> pool;
    for (const auto& idx : p) {
      if (!idx.is_number_integer() || idx.get<long long>() < 0)
        throw ParseError("pool indices must be non-negative integers");
      pool.push_back(idx.get<std::size_t>());
    }
    pools.push_back(std::move(pool));
  }
  return pools;
}

std::vector<Interval> parse_box(const json& j, std::size_t dim) {
  if (!j.is_array()) throw ParseError("input_box must be an array");
  std::vector<Interval> box;
  if (j.size() == 2 && j[0].is_number()) {
    box.assign(dim, Interval{j[0].get<double>(), j[1].get<double>()});
  } else {
    for (const auto& e : j) {
      if (!e.is_array() || e.size() != 2) throw ParseError("input_box entries must be [lo, hi]");
      box.push_back({e[0].get<double>(), e[1].get<double>()});
    }
  }
  for (std::size_t i = 0; i < box.size(); ++i)
    if (!(box[i].lo <= box[i].hi))
      throw IntervalError("input_box entry " + std::to_string(i) + " has lo > hi");
  return box;
}

Network network_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("network document must be an object");
  const std::size_t input_dim = require(doc, "input_dim").get<std::size_t>();
  std::vector<Interval> box = parse_box(require(doc, "input_box"), input_dim);

  std::vector<Layer> layers;
  std::size_t prev = input_dim;
  std::size_t l = 0;
  for (const auto& lj : require(doc, "layers")) {
    ++l;
    const std::string kind = require(lj, "kind").get<std::string>();
    if (kind == "dense") {
      const json& w = require(lj, "weights");
      const json& b = require(lj, "bias");
      const std::size_t n_in = w.size();
      const std::size_t n_out = b.size();
      DenseLayer dense;
      dense.weights = Matrix(n_in, n_out);
      for (std::size_t r = 0; r < n_in; ++r) {
        if (w[r].size() != n_out)
          throw DimensionError("layer " + std::to_string(l) + ": weight row " + std::to_string(r) +
                               " has " + std::to_string(w[r].size()) + " entries, expected " +
                               std::to_string(n_out));
        for (std::size_t c = 0; c < n_out; ++c) dense.weights(r, c) = w[r][c].get<double>();
      }
      dense.bias = b.get<std::vector<double>>();
      dense.activation = parse_activation(lj.value("activation", std::string("relu")));
      dense.scale = lj.value("scale", 1.0);
      dense.step_offset = lj.value("step_offset", 0.0);
      layers.emplace_back(std::move(dense));
    } else if (kind == "maxpool") {
      layers.emplace_back(MaxPoolLayer{prev, parse_pools(require(lj, "pools"))});
    } else if (kind == "avgpool") {
      layers.emplace_back(AvgPoolLayer{prev, parse_pools(require(lj, "pools"))});
    } else {
      throw ParseError("layer " + std::to_string(l) + ": unknown kind '" + kind + "'");
    }
    prev = layer_outputs(layers.back());
  }
  return Network(input_dim, std::move(box), std::move(layers));
}

json network_to_json(const Network& net) {
  json doc;
  doc["input_dim"] = net.input_dim();
  json box = json::array();
  for (const auto& iv : net.input_box()) box.push_back({iv.lo, iv.hi});
  doc["input_box"] = box;
  json layers = json::array();
  for (const Layer& layer : net.layers()) {
    json lj;
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      lj["kind"] = "dense";
      json w = json::array();
      for (std::size_t r = 0; r < dense->inputs(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < dense->outputs(); ++c) row.push_back(dense->weights(r, c));
        w.push_back(row);
      }
      lj["weights"] = w;
      lj["bias"] = dense->bias;
      lj["activation"] = activation_name(dense->activation);
      if (dense->scale != 1.0) lj["scale"] = dense->scale;
      if (dense->step_offset != 0.0) lj["step_offset"] = dense->step_offset;
    } else if (const auto* mp = std::get_if<MaxPoolLayer>(&layer)) {
      lj["kind"] = "maxpool";
      lj["pools"] = mp->pools;
    } else if (const auto* ap = std::get_if<AvgPoolLayer>(&layer)) {
      lj["kind"] = "avgpool";
      lj["pools"] = ap->pools;
    }
    layers.push_back(lj);
  }
  doc["layers"] = layers;
  return doc;
}

}  // namespace

Network parse_network(const std::string& text) {
  const json doc = parse_json(text, "network");
  try {
    return network_from_json(doc);
  } catch (const json::exception& e) {
    throw ParseError(std::string("network: ") + e.what());
  }
}

Network load_network(const std::filesystem::path& path) {
  return parse_network(read_text_file(path));
}

std::string network_to_string(const Network& net) { return network_to_json(net).dump(2) + "\n"; }

void save_network(const Network& net, const std::filesystem::path& path) {
  write_text_file(path, network_to_string(net));
}

}  // namespace relumip
