#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "agl/encoding.hpp"

namespace agl {

enum class Architecture { FFN, RNN, GRU };

/// Activation of the GRU candidate state.
enum class Candidate { Tanh, Relu };

std::string_view to_string(Architecture arch);
std::string_view to_string(Candidate c);
Architecture parse_architecture(std::string_view name);
Candidate parse_candidate(std::string_view name);

struct NetworkConfig {
  Architecture architecture = Architecture::FFN;
  /// Total hidden width, shared equally among the laminations.
  int neurons = 64;
  int depth = 1;
  /// Number of independent channels per hidden layer; 1 = dense.
  int laminations = 1;
  /// Characters per input step; always 12 for FFN.
  int window = kFullWindow;
  Candidate gru_candidate = Candidate::Relu;

  int input_width() const { return window * static_cast<int>(kAlphabetSize); }
  int steps() const { return kFullWindow - window + 1; }

  /// Structural validity: positive sizes, neurons divisible by laminations,
  /// window in 1..12, FFN window fixed at 12. Throws ParameterError.
  void validate() const;

  bool operator==(const NetworkConfig&) const = default;
};

/// One named weight array. A non-empty mask has the value's shape and holds
/// 1 where a connection exists and 0 where lamination removes it.
struct Tensor {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd mask;

  bool masked() const { return mask.size() != 0; }
};

/// All weights of a network in layer order. Per hidden layer:
///   FFN  W, b
///   RNN  W, U, b
///   GRU  Wz, Uz, bz, Wr, Ur, br, Wh, Uh, bh
/// followed by the read-out row vector and scalar bias. W maps the layer
/// input, U the layer's own previous state; biases are column vectors.
struct Parameters {
  NetworkConfig config;
  std::vector<Tensor> tensors;

  std::size_t scalar_count() const;
};

/// Tensors per hidden layer for an architecture (2, 3 or 9).
int tensors_per_layer(Architecture arch);

using Gradients = std::vector<Eigen::MatrixXd>;

/// Uniform weights in +-sqrt(1/fan_in) (fan_in counts unmasked inputs per
/// unit), zero biases, masks applied.
Parameters init_network(const NetworkConfig& config, std::uint64_t seed);

/// Zeroes every masked entry.
void apply_masks(Parameters& params);

/// Probability that the example is ungrammatical.
double forward(const Parameters& params, const EncodedExample& example);

/// Batched forward pass; one probability per example.
std::vector<double> forward_batch(const Parameters& params, std::span<const EncodedExample* const> batch);
std::vector<double> forward_batch(const Parameters& params, std::span<const EncodedExample> batch);

inline constexpr double kProbabilityEpsilon = 1e-12;

/// Binary cross entropy with p clamped to [eps, 1 - eps].
double loss_bce(double p, double y);

struct BackwardResult {
  Gradients gradients;
  /// Mean loss_bce over the batch.
  double loss = 0.0;
};

/// Mean-over-batch gradient of loss_bce for every tensor, with
/// backpropagation through time for the recurrent architectures.
BackwardResult backward(const Parameters& params, std::span<const EncodedExample* const> batch);
BackwardResult backward(const Parameters& params, std::span<const EncodedExample> batch);

struct OptimizerState {
  std::vector<Eigen::MatrixXd> velocity;
  double learning_rate = 0.01;
  double momentum = 0.95;

  static OptimizerState zeros_like(const Parameters& params, double learning_rate = 0.01, double momentum = 0.95);
};

/// Classical momentum: v <- momentum * v + g; theta <- theta - lr * v; masks
/// re-applied afterwards.
void momentum_step(Parameters& params, const Gradients& grads, OptimizerState& state);

}  // namespace agl
