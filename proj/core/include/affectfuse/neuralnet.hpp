#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affectfuse/common.hpp"

namespace affectfuse::nn {

enum class LossKind { MAE, BinaryNLL };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

/// Architecture and training hyperparameters of one MLP.
struct MLPConfig {
  int n_hidden = 1;             // N in [0, 3]
  int first_units = 64;         // U in [64, 512]
  double learning_rate = 1e-3;  // alpha in [1e-6, 10]
  LossKind loss = LossKind::BinaryNLL;
  std::uint64_t seed = 0;
  int max_epochs = 50;
  int batch_size = 32;
  int patience = 5;

  /// Throws RangeError when a field leaves its allowed range.
  void validate() const;

  bool operator==(const MLPConfig&) const = default;
};

/// Hidden widths: U first, then each layer half the previous, never below 32.
/// Throws RangeError unless 0 <= n_hidden <= 3 and 64 <= first_units <= 512.
std::vector<int> layer_sizes(int n_hidden, int first_units);

/// Position of one affine layer inside the flat parameter vector.
/// Weights are row-major `out x in`, followed elsewhere by `out` biases.
struct LayerShape {
  int in = 0;
  int out = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;

  bool operator==(const LayerShape&) const = default;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;

  bool operator==(const EpochStats&) const = default;
};

/// ReLU hidden layers and a single sigmoid output unit. All parameters live
/// in one contiguous vector so optimizers and gradient checks can treat the
/// network as a flat parameter array.
class MLPModel {
 public:
  /// All weights and biases zero.
  MLPModel(const MLPConfig& config, int input_dim);

  /// Uniform(-r, r) weights with r = sqrt(6 / (fan_in + fan_out)) drawn from
  /// `config.seed`; biases zero.
  static MLPModel initialized(const MLPConfig& config, int input_dim);

  int input_dim() const { return layers_.front().in; }
  /// input, hidden widths..., 1
  std::vector<int> layer_dims() const;
  const std::vector<LayerShape>& layers() const { return layers_; }
  const MLPConfig& config() const { return config_; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::span<double> weights(std::size_t layer);
  std::span<double> biases(std::size_t layer);

  const std::vector<EpochStats>& history() const { return history_; }
  void set_history(std::vector<EpochStats> history) { history_ = std::move(history); }

  /// Probability in [0, 1]. Throws DimMismatch on a wrong input length.
  double forward(std::span<const double> x) const;

  bool operator==(const MLPModel&) const = default;

 private:
  MLPConfig config_;
  std::vector<LayerShape> layers_;
  std::vector<double> params_;
  std::vector<EpochStats> history_;
};

inline constexpr double kProbabilityClamp = 1e-7;

double sigmoid(double z);

/// MAE: |p - y|. BinaryNLL: -[y ln p + (1 - y) ln(1 - p)] with p clamped to
/// [1e-7, 1 - 1e-7].
double loss(LossKind kind, double p, double y);

/// Mean loss of the model over a batch.
double batch_loss(const MLPModel& model, MatrixView x, std::span<const double> y, LossKind kind);

struct Gradients {
  std::vector<double> values;  // same layout as MLPModel::parameters()
  double loss = 0.0;           // mean batch loss at the current parameters
};

/// Exact gradient of the mean batch loss. ReLU'(0) = 0; the MAE
/// subgradient at p == y is 0; BinaryNLL uses dL/dz = p - y.
Gradients backward(const MLPModel& model, MatrixView x, std::span<const double> y, LossKind kind);

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  explicit AdamState(std::size_t n_params) : m(n_params, 0.0), v(n_params, 0.0) {}

  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
};

/// One bias-corrected Adam update; increments `state.t` first.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double learning_rate);

/// Mini-batch Adam with a seeded shuffle per epoch. The dev loss is
/// evaluated after each epoch; training stops after `max_epochs` or after
/// `patience` epochs without improvement, and the best-dev snapshot is
/// returned. Throws NonFiniteLoss if the loss becomes NaN or infinite.
MLPModel train(const MLPConfig& config, MatrixView x_train, std::span<const double> y_train,
               MatrixView x_dev, std::span<const double> y_dev);

/// forward() over every row.
std::vector<double> predict_proba(const MLPModel& model, MatrixView x);

/// MLP1: "MLP1", u32 length, canonical JSON (config, layer dims, history),
/// then every layer's weights and biases as little-endian f64.
void save_model(std::ostream& out, const MLPModel& model);
void save_model(const std::filesystem::path& path, const MLPModel& model);
MLPModel load_model(std::istream& in);
MLPModel load_model(const std::filesystem::path& path);

}  // namespace affectfuse::nn
