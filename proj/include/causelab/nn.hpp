#pragma once

// Fully connected regressor: ReLU hidden layers, sigmoid outputs, trained on
// mean squared error with full-batch steps.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "causelab/estimator.hpp"

namespace causelab {

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;     // out

  bool operator==(const DenseLayer&) const = default;
};

class Network {
 public:
  Network() = default;
  explicit Network(std::vector<std::size_t> dims);  // all-zero parameters

  /// Weights ~ U(-a, a) with a = sqrt(3 / fan_in); biases 0.
  static Network init(std::vector<std::size_t> dims, std::uint64_t seed);
  /// The default [15, width, width, width, 2] regressor.
  static std::vector<std::size_t> default_dims(std::size_t hidden_width = 128);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  /// Flat view order: layer by layer, weights then bias.
  double& parameter(std::size_t flat_index);
  double parameter(std::size_t flat_index) const;

  std::vector<double> forward(std::span<const double> input) const;

  std::string serialize() const;
  static Network parse(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static Network load(const std::filesystem::path& path);

  bool operator==(const Network&) const = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<DenseLayer> layers_;
};

/// Row-major inputs (n x input_dim) and targets (n x output_dim).
struct Batch {
  std::size_t n = 0;
  std::vector<double> inputs;
  std::vector<double> targets;

  static Batch from_labels(std::span<const LabeledExample> labels);
};

/// Mean over examples of the squared error summed over outputs.
double loss(const Network& net, const Batch& batch);

struct GradientResult {
  Network grad;  // same shape as the network
  double loss = 0.0;
};

GradientResult gradient(const Network& net, const Batch& batch);

enum class Optimizer { gradient_descent, adam };

const char* to_string(Optimizer o);
Optimizer parse_optimizer(const std::string& name);

struct TrainConfig {
  std::size_t iterations = 600;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
};

struct TrainResult {
  Network net;
  std::vector<double> loss_trace;  // loss before each step
};

/// Throws Error(diverged) when the loss becomes non-finite.
TrainResult train(Network net, const Batch& batch, const TrainConfig& cfg);

/// (lower, upper) for every subpopulation index. Parallel across inputs.
std::vector<std::array<double, 2>> predict_all(const Network& net);

namespace reference {
std::vector<std::array<double, 2>> predict_all(const Network& net);
}  // namespace reference

void write_predictions(const std::filesystem::path& path,
                       std::span<const std::array<double, 2>> predictions);
std::vector<std::array<double, 2>> read_predictions(const std::filesystem::path& path);

}  // namespace causelab
