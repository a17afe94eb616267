#pragma once
// Score-field regressors over normalized base poses: a ReLU multilayer
// perceptron trained with Adam, and a LASSO baseline solved by coordinate
// descent.

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "baseplace/dataset.hpp"

namespace baseplace {

/// Affine map of each base-range axis onto [-1, 1].
class Normalizer {
 public:
  Normalizer() = default;
  explicit Normalizer(const BaseRange& r);

  Vec3 normalize(const BasePose& b) const;
  BasePose denormalize(const Vec3& n) const;
  bool in_range(const BasePose& b) const;
  const BaseRange& range() const { return range_; }

 private:
  BaseRange range_;
};

struct Standardizer {
  double mean = 0.0;
  double stddev = 1.0;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully connected network, ReLU on hidden layers, linear output.
/// Activations are stored column-per-sample.
template <typename Scalar>
class MlpNetwork {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  MlpNetwork() = default;
  /// Uniform(+-1/sqrt(fan_in)) initialization of weights and biases.
  MlpNetwork(const std::vector<int>& widths, std::mt19937_64& rng);

  const std::vector<int>& widths() const { return widths_; }
  std::vector<Matrix>& weights() { return w_; }
  std::vector<Vector>& biases() { return b_; }
  const std::vector<Matrix>& weights() const { return w_; }
  const std::vector<Vector>& biases() const { return b_; }
  std::size_t parameter_count() const;

  /// inputs: widths.front() x B. Returns 1 x B outputs.
  Matrix forward(const Matrix& inputs) const;
  /// Mean squared error over the batch; fills gradients shaped like the parameters.
  Scalar loss_and_gradient(const Matrix& inputs, const Matrix& targets,
                           std::vector<Matrix>& grad_w, std::vector<Vector>& grad_b) const;
  Scalar loss(const Matrix& inputs, const Matrix& targets) const;

  std::vector<Scalar> flat_parameters() const;
  void set_flat_parameters(std::span<const Scalar> p);

 private:
  std::vector<int> widths_;
  std::vector<Matrix> w_;
  std::vector<Vector> b_;
  // scratch buffers reused across calls
  mutable std::vector<Matrix> z_, a_;
};

using MlpScalar = float;

struct MlpHyperParams {
  std::vector<int> hidden = {48, 96, 192};
  double learning_rate = 1e-4;
  int epochs = 5000;
  int batch_size = 256;
  std::uint64_t seed = 0;
  double holdout_fraction = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct EvalReport {
  double rmse = 0.0;
  double sd = 0.0;
  std::size_t rows = 0;
};

struct MlpTrainingInfo {
  MlpHyperParams hp;
  double first_epoch_loss = 0.0;
  double final_loss = 0.0;
  std::size_t train_rows = 0;
  std::size_t holdout_rows = 0;
  EvalReport holdout;
  std::vector<double> epoch_loss;  // standardized-target MSE per epoch
};

struct MlpRegressor {
  MlpNetwork<MlpScalar> net;
  Normalizer normalizer;
  Standardizer target;
  MlpTrainingInfo training;

  /// Raw-score predictions for normalized inputs (3 x B).
  std::vector<double> predict_normalized(const Eigen::Matrix3Xd& inputs) const;
};

struct LassoRegressor {
  Vec3 weights = Vec3::Zero();
  double bias = 0.0;
  double alpha = 0.5;
  Normalizer normalizer;
  int sweeps = 0;
  bool converged = false;
};

using Regressor = std::variant<MlpRegressor, LassoRegressor>;

struct Prediction {
  double value = 0.0;
  bool extrapolated = false;  // input outside the training range
};

struct DatasetSplit {
  std::vector<SampleRow> train;
  std::vector<SampleRow> test;
};

/// Seeded shuffle, then the first round(fraction * n) rows form the test part.
DatasetSplit split_dataset(std::span<const SampleRow> rows, double holdout_fraction,
                           std::uint64_t seed);

/// Trains on the training part of split_dataset(d, hp.holdout_fraction, hp.seed);
/// the held-out report is kept in the training metadata.
MlpRegressor train_mlp(const SampleSet& d, const MlpHyperParams& hp = {});

/// Minimizes (1/n) sum (y - w.x - b)^2 + alpha * |w|_1 on normalized inputs.
LassoRegressor train_lasso(const SampleSet& d, double alpha = 0.5);

Prediction predict(const Regressor& r, const BasePose& b);
std::vector<double> predict_batch(const Regressor& r, std::span<const BasePose> bases);
const Normalizer& normalizer_of(const Regressor& r);

/// RMSE and population SD of the residuals prediction - truth.
EvalReport evaluate(const Regressor& r, std::span<const SampleRow> rows);
EvalReport residual_stats(std::span<const double> residuals);

nlohmann::json regressor_to_json(const Regressor& r);
Regressor regressor_from_json(const nlohmann::json& j);
void save_regressor(const Regressor& r, const std::filesystem::path& path,
                    const nlohmann::json& provenance = {});
Regressor load_regressor(const std::filesystem::path& path);

}  // namespace baseplace
