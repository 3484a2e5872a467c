#pragma once

// Feed-forward MLP surrogate of the truth model: (geometry, f) -> six
// electrical properties. Inputs and outputs are min-max mapped to [-1, 1];
// phase outputs are treated as periodic (360 degrees) both in the loss and
// in the reported error.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "blc/coupler.hpp"
#include "blc/dataset.hpp"

namespace blc {

enum class Activation { Tanh, Silu, Sigmoid };

std::string_view to_string(Activation a) noexcept;
Activation activation_from_string(std::string_view name);

/// Affine map of each column from [lo, hi] to [-1, 1].
struct AffineNorm {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::VectorXd invert(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& m) const;
};

struct DenseLayer {
  Eigen::MatrixXd w;  // rows = outputs, cols = inputs
  Eigen::VectorXd b;
};

struct MlpModel {
  Topology topology = Topology::Folded;
  std::vector<int> layer_sizes;
  Activation activation = Activation::Silu;
  std::vector<DenseLayer> layers;
  AffineNorm input_norm;
  AffineNorm output_norm;
  std::vector<std::size_t> periodic_outputs;  // indices with a 360-unit period

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  void validate() const;
};

inline constexpr double kPhasePeriodDeg = 360.0;

/// Random initialization, U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and
/// biases. Normalizers come from `norm`.
MlpModel make_model(Topology kind, std::span<const int> hidden, Activation act, const Normalization& norm,
                    std::uint64_t seed);

/// Raw inputs (geometry..., f) to physical outputs; phases wrapped.
Eigen::VectorXd forward(const MlpModel& m, std::span<const double> x_raw);
ElectricalVector predict(const MlpModel& m, std::span<const double> x, double f_ghz);

/// Network map on already-normalized inputs, one sample per column.
Eigen::MatrixXd forward_normalized(const MlpModel& m, const Eigen::MatrixXd& inputs);

/// One sample per column, both in normalized units.
struct Batch {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
};

Batch make_batch(const MlpModel& m, std::span<const SampleRecord> records);

struct Gradient {
  std::vector<DenseLayer> layers;
};

/// Mean over samples and outputs of the squared (period-wrapped) residual.
double batch_loss(const MlpModel& m, const Batch& batch);
/// Exact gradient of batch_loss by backpropagation.
Gradient gradient(const MlpModel& m, const Batch& batch);

struct TrainConfig {
  int epochs = 500;
  int batch_size = 16;
  double learning_rate = 2e-3;
  double final_lr_fraction = 0.01;  // cosine decay to learning_rate * this
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::vector<int> hidden = {96, 96, 96, 96, 96};
  Activation activation = Activation::Silu;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  ElectricalVector val_mae{};
};

std::pair<MlpModel, TrainReport> train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg);

/// Mean absolute error per output in physical units (dB, degrees; phase
/// errors measured on the circle).
ElectricalVector evaluate_mae(const MlpModel& m, const Dataset& d);

inline constexpr int kModelFormatVersion = 1;

void save_model(const MlpModel& m, const std::filesystem::path& path);
std::string model_to_string(const MlpModel& m);
MlpModel model_from_string(const std::string& content);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace blc
