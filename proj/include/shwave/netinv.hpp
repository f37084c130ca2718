// NetInv: a small convolutional network that maps reflection spectra to
// depth profiles, with hand-written forward/backward passes and Adam.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shwave/defect.hpp"
#include "shwave/forward.hpp"

namespace shwave::netinv {

struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<double> v);
  static Tensor vector(std::vector<double> v);

  std::size_t size() const { return values.size(); }
  bool all_finite() const;
};

enum class LayerKind { dense, conv1d, relu, reshape };

const char* to_string(LayerKind kind);

// Activations are (channels x length), stored channel-major. Dense layers
// read their input flattened and emit (1 x out).
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  int in = 0, out = 0;                     // dense
  int in_channels = 0, out_channels = 0;   // conv1d
  int kernel = 0;                          // conv1d, odd
  int channels = 0, length = 0;            // reshape target

  static LayerSpec dense(int in, int out) { return {LayerKind::dense, in, out}; }
  static LayerSpec conv1d(int in_ch, int out_ch, int kernel) {
    LayerSpec s;
    s.kind = LayerKind::conv1d;
    s.in_channels = in_ch;
    s.out_channels = out_ch;
    s.kernel = kernel;
    return s;
  }
  static LayerSpec relu() { return {}; }
  static LayerSpec reshape(int channels, int length) {
    LayerSpec s;
    s.kind = LayerKind::reshape;
    s.channels = channels;
    s.length = length;
    return s;
  }

  bool operator==(const LayerSpec&) const = default;
};

struct ActivationShape {
  int channels = 1;
  int length = 0;
  int size() const { return channels * length; }
};

// Per-feature input standardization: (x - mean) / scale.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;
};

struct Model {
  std::vector<LayerSpec> layers;
  int input_width = 0;
  std::vector<ActivationShape> shapes;  // shapes[0] = input, shapes[l + 1] = after layer l
  std::vector<std::size_t> param_offset;  // per layer; weights then bias
  std::vector<double> params;
  std::optional<Standardization> standardization;

  int output_width() const { return shapes.back().size(); }
  std::size_t parameter_count() const { return params.size(); }

  /// Validates shape composition (at least one conv1d, odd kernels,
  /// matching sizes) and allocates zeroed parameters. Throws
  /// Error(shape_mismatch) on any incompatibility.
  static Model build(std::vector<LayerSpec> layers, int input_width);
};

// Number of parameters owned by a layer (weights + bias).
std::size_t layer_parameter_count(const LayerSpec& spec);

/// 2M -> dense 256 + relu -> (16 x 16) -> conv5 16->32 + relu -> conv5 32->32
/// + relu -> flatten -> dense 512 -> P.
std::vector<LayerSpec> default_architecture(int spectrum_samples, int profile_points);

/// Glorot-uniform weights from a seeded generator, zero biases.
void initialize(Model& model, std::uint64_t seed);

Tensor model_forward(const Model& model, const Tensor& input);

double mse_loss(const Tensor& prediction, const Tensor& target);

struct Gradients {
  std::vector<double> values;  // same layout as Model::params
  double loss = 0.0;           // mse + lambda * |theta|^2
};

/// Exact gradient of mse_loss(model_forward(input), target) + lambda |theta|^2.
Gradients backward(const Model& model, const Tensor& input, const Tensor& target, double lambda);

struct AdamState {
  std::vector<double> m, v;
  long step = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

void adam_step(std::vector<double>& params, const std::vector<double>& gradients, AdamState& state,
               double learning_rate);

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay_lambda = 1e-5;
  int batch_size = 32;
  int max_epochs = 400;
  int early_stop_patience = 40;
  std::uint64_t seed = 1;
  int workers = 1;  // per-sample gradient fan-out inside a batch

  void validate() const;
};

struct Example {
  std::vector<double> features;  // raw (unstandardized) network input
  std::vector<double> target;
};

struct EpochRecord {
  int epoch = 0;
  double train_mse = 0.0;
  double validation_mse = 0.0;
};

struct TrainResult {
  Model model;  // parameters of the best validation epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_validation_mse = 0.0;
};

/// Feature vector of a spectrum: [Re C_0 .. Re C_{M-1}, Im C_0 .. Im C_{M-1}].
std::vector<double> spectrum_features(const ReflectionSpectrum& spectrum);

Standardization fit_standardization(const std::vector<Example>& data,
                                    const std::vector<std::size_t>& indices);

/// Minibatch Adam over a seeded shuffle of `train_idx`, validation MSE per
/// epoch, early stopping by patience. `model` supplies the architecture and
/// initial parameters; standardization statistics are fitted on the training
/// indices and stored in the returned model. Throws Error(divergence) on a
/// non-finite loss.
TrainResult train(const Model& model, const std::vector<Example>& data,
                  const std::vector<std::size_t>& train_idx,
                  const std::vector<std::size_t>& validation_idx, const TrainConfig& config);

/// Standardized forward pass on spectrum features, clamped to [0, 0.8 * depth].
/// Throws Error(unstandardized_model) when the model carries no statistics.
DepthProfile predict(const Model& model, const ReflectionSpectrum& spectrum,
                     const SpatialGrid& grid, const PlateSpec& plate);

}  // namespace shwave::netinv
