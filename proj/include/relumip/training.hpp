#ifndef RELUMIP_TRAINING_HPP_
#define RELUMIP_TRAINING_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "relumip/mip_model.hpp"
#include "relumip/network.hpp"
#include "relumip/solver.hpp"

namespace relumip {

struct Dataset {
  std::vector<std::vector<double>> inputs;
  std::vector<std::size_t> labels;

  std::size_t size() const { return inputs.size(); }
};

Dataset parse_dataset(const std::string& text);
Dataset load_dataset(const std::filesystem::path& path);
std::string dataset_to_string(const Dataset& d);
void save_dataset(const Dataset& d, const std::filesystem::path& path);

enum class TrainingVariant { BinaryStep, Binarized };
enum class Loss { L1, Hinge, Squared };

const char* loss_name(Loss l);
Loss parse_loss(const std::string& s);

struct TrainingSpec {
  std::vector<std::size_t> arch;  // n0, n1, ..., nL
  Dataset data;
  TrainingVariant variant = TrainingVariant::BinaryStep;
  int P = 1;               // binarized weight scale
  Loss loss = Loss::L1;
  double radius = 1.0;     // binary-step input domain [-r, r]
  double epsilon = 1e-4;   // replaces strict inequalities

  std::size_t num_layers() const { return arch.size() - 1; }
  /// Single output: labels {0, 1}. Otherwise one class per output.
  std::size_t num_classes() const { return arch.back() == 1 ? 2 : arch.back(); }
  void validate() const;
};

/// Target value of output i for a label: one-hot {0, 1} for L1, {-1, +1} for hinge.
double training_target(const TrainingSpec& spec, std::size_t label, std::size_t output);
/// Loss of one sample given its outputs.
double sample_loss(const TrainingSpec& spec, const std::vector<double>& outputs, std::size_t label);
/// Class decision: argmax, or a threshold for a single output (0.5 under L1, 0 under hinge).
std::size_t predict_class(const TrainingSpec& spec, const std::vector<double>& outputs);

/// Binary step network: weights in [-1, 1], activations in {0, 1}, linear regression head.
MipModel encode_binary_training(const TrainingSpec& spec);
/// Binarized network: weights P * {-1, 0, 1}, sign activations, scaled linear output.
MipModel encode_binarized_training(const TrainingSpec& spec);
/// Dispatches on spec.variant.
MipModel encode_training(const TrainingSpec& spec);

struct TrainingReport {
  std::vector<std::vector<double>> mip_outputs;      // per sample, from the incumbent
  std::vector<std::vector<double>> forward_outputs;  // per sample, decoded network
  std::vector<double> losses;                        // per sample, decoded network
  std::vector<std::size_t> predicted;
  std::size_t activation_mismatches = 0;  // MIP indicators vs forward pass
  std::size_t misclassified = 0;
  double max_output_diff = 0.0;
  double max_product_error = 0.0;  // |u - w * activation| over all products
  double total_loss = 0.0;
};

struct TrainedNetwork {
  Network net;
  TrainingReport report;
};

/// Rebuilds the trained network from an incumbent and checks it sample by sample.
TrainedNetwork decode_trained(const TrainingSpec& spec, const MipModel& model, const SolveResult& result);

std::string training_report_to_string(const TrainingReport& r);

}  // namespace relumip

#endif  // RELUMIP_TRAINING_HPP_
