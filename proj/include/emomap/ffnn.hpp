#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "emomap/lexicon.hpp"
#include "emomap/rng.hpp"

namespace emomap {

struct AdamConfig {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct FfnnConfig {
  std::vector<int> hidden_sizes{128, 128};
  double dropout_hidden = 0.2;
  long iterations = 10000;
  AdamConfig adam;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DenseLayer {
  Matrix weights;  // fan_out x fan_in
  Vector bias;     // fan_out
};

/// Rectifier hidden layers followed by an affine output layer. Every hidden
/// layer is shared by all outputs; only the last layer is output-specific.
struct Network {
  std::vector<DenseLayer> layers;

  Eigen::Index input_size() const { return layers.front().weights.cols(); }
  Eigen::Index output_size() const { return layers.back().weights.rows(); }
  std::size_t parameter_count() const;
};

enum class Mode { Train, Eval };

/// Intermediate values of one forward pass, consumed by backward().
struct ForwardCache {
  Mode mode = Mode::Eval;
  Matrix input;
  std::vector<Matrix> pre_activations;  // per layer, before the rectifier
  std::vector<Matrix> activations;      // per hidden layer, after rectifier and dropout
  std::vector<Matrix> dropout_masks;    // per hidden layer; empty in eval mode
  std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes;
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
/// `hidden_sizes` may be empty (purely affine network).
Network init_network(Eigen::Index input_size, std::span<const int> hidden_sizes,
                     Eigen::Index output_size, std::uint64_t seed);

/// Forward pass. In train mode every hidden layer's output goes through
/// inverted dropout with masks drawn from `dropout_rng`.
Matrix forward(const Network& net, const Matrix& x, Mode mode, double dropout,
               Rng* dropout_rng = nullptr, ForwardCache* cache = nullptr);

/// Mean of the squared error over all cells.
double mse_loss(const Matrix& pred, const Matrix& gold);

/// Exact gradients of mse_loss through the cached forward computation.
Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& gold);

struct TrainResult {
  Network network;
  std::vector<double> loss_trace;
};

/// Full-batch Adam training for exactly cfg.iterations steps with a fresh
/// dropout mask per step. Throws DivergenceError on a non-finite loss.
TrainResult train_network(const FfnnConfig& cfg, const Matrix& x, const Matrix& y);

class FfnnModel {
public:
  FfnnModel() = default;
  FfnnModel(Network network, FfnnConfig config, EmotionFormat source_format,
            EmotionFormat target_format, std::vector<double> loss_trace = {});

  const Network& network() const { return network_; }
  Network& network() { return network_; }
  const FfnnConfig& config() const { return config_; }
  const EmotionFormat& source_format() const { return source_format_; }
  const EmotionFormat& target_format() const { return target_format_; }
  const std::vector<double>& loss_trace() const { return loss_trace_; }

  /// Eval-mode forward pass.
  Matrix predict(const Matrix& x) const;

private:
  Network network_;
  FfnnConfig config_;
  EmotionFormat source_format_;
  EmotionFormat target_format_;
  std::vector<double> loss_trace_;
};

FfnnModel init_ffnn(const FfnnConfig& cfg, const EmotionFormat& source_format,
                    const EmotionFormat& target_format);
Matrix ffnn_forward(const FfnnModel& model, const Matrix& x, Mode mode, Rng* dropout_rng = nullptr,
                    ForwardCache* cache = nullptr);
double ffnn_loss(const Matrix& pred, const Matrix& gold);
Gradients ffnn_backward(const FfnnModel& model, const ForwardCache& cache, const Matrix& gold);
FfnnModel train_ffnn(const FfnnConfig& cfg, const AlignedLexicon& train);

}  // namespace emomap
