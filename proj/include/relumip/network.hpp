#ifndef RELUMIP_NETWORK_HPP_
#define RELUMIP_NETWORK_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace relumip {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Row-major dense matrix. Weight matrices are stored [inputs][outputs].
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Activation {
  Relu,    // max{0, y}
  Linear,  // y
  Step,    // 1 if y + step_offset >= 0 else 0
  Sign,    // +1 if y + step_offset >= 0 else -1
};

struct DenseLayer {
  Matrix weights;             // [n_{l-1}][n_l]
  std::vector<double> bias;   // [n_l]
  Activation activation = Activation::Relu;
  // Pre-activation is scale * (W^T x + b). Only decoded binarized output layers use scale != 1.
  double scale = 1.0;
  // Shifts the threshold of Step/Sign activations; ignored otherwise.
  double step_offset = 0.0;

  std::size_t inputs() const { return weights.rows(); }
  std::size_t outputs() const { return weights.cols(); }
};

struct MaxPoolLayer {
  std::size_t input_size = 0;
  std::vector<std::vector<std::size_t>> pools;
};

struct AvgPoolLayer {
  std::size_t input_size = 0;
  std::vector<std::vector<std::size_t>> pools;
};

using Layer = std::variant<DenseLayer, MaxPoolLayer, AvgPoolLayer>;

std::size_t layer_inputs(const Layer& layer);
std::size_t layer_outputs(const Layer& layer);
double apply_activation(Activation act, double y, double step_offset = 0.0);
const char* activation_name(Activation act);

/// A trained feed-forward network. Validated on construction and immutable afterwards.
class Network {
 public:
  Network(std::size_t input_dim, std::vector<Interval> input_box, std::vector<Layer> layers);

  std::size_t input_dim() const { return input_dim_; }
  const std::vector<Interval>& input_box() const { return input_box_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t num_layers() const { return layers_.size(); }

  /// 1-based layer access matching the usual l = 1..L indexing.
  const Layer& layer(std::size_t l) const { return layers_.at(l - 1); }

  /// Width of layer l's output; l = 0 is the input.
  std::size_t width(std::size_t l) const;
  std::size_t output_dim() const { return width(layers_.size()); }

 private:
  std::size_t input_dim_;
  std::vector<Interval> input_box_;
  std::vector<Layer> layers_;
};

/// Per-layer values of one forward pass. Index 0 holds the input.
struct Activations {
  std::vector<std::vector<double>> pre;   // y^l; pooling layers repeat their output
  std::vector<std::vector<double>> post;  // x^l

  const std::vector<double>& output() const { return post.back(); }
};

Activations forward(const Network& net, std::span<const double> x0);

std::size_t argmax(std::span<const double> v);

// Network documents (JSON).
Network parse_network(const std::string& text);
Network load_network(const std::filesystem::path& path);
std::string network_to_string(const Network& net);
void save_network(const Network& net, const std::filesystem::path& path);

}  // namespace relumip

#endif  // RELUMIP_NETWORK_HPP_
