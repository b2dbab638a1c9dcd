#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "geofreq/features.hpp"

namespace geofreq::models {

struct MlpConfig {
  std::vector<int> hidden{32, 16};
  int epochs = 500;
  double step_size = 1e-2;
  std::uint64_t seed = 1;
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

/// Feed-forward network: ReLU hidden layers and a linear head producing the
/// log-rate; mu = exposure * exp(head).
struct MlpModel {
  std::vector<std::string> columns;
  MlpConfig config;
  std::vector<DenseLayer> layers;  // hidden layers then the 1-unit head
  std::vector<double> training_nll;

  /// Network output for each row (without the offset).
  Eigen::VectorXd raw_score(const Eigen::MatrixXd& x) const;

  std::size_t parameter_count() const;
  /// Parameters flattened layer by layer: weights (column-major) then bias.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& theta);
};

/// Layers with the given sizes, weights uniform in +-1/sqrt(fan_in), zero biases.
MlpModel init_mlp(std::vector<std::string> columns, const MlpConfig& config);

struct LossAndGradient {
  double loss = 0.0;  // mean NLL without ln(y!)
  Eigen::VectorXd gradient;  // same layout as MlpModel::parameters()
};

/// Forward and backward pass over the full batch.
LossAndGradient mlp_loss_and_gradient(const MlpModel& model, const features::FeatureMatrix& m);

/// Full-batch gradient descent from init_mlp, with the head bias started at
/// ln(sum y / sum e). Throws FitError naming the epoch if the loss becomes
/// non-finite.
MlpModel fit_mlp_poisson(const features::FeatureMatrix& m, const MlpConfig& config = {});

}  // namespace geofreq::models
