#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "geofreq/features.hpp"
#include "geofreq/models/poisson.hpp"

namespace geofreq::models {

/// Poisson GLM with log link: mu = exposure * exp(intercept + X beta).
struct GlmFit {
  std::vector<std::string> columns;
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  double eta = 0.0;    // overall penalty
  double alpha = 0.0;  // L1 share of the penalty
  ConvergenceRecord convergence;

  /// intercept + X beta (without the offset).
  Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& x) const;
};

struct IrlsOptions {
  int max_iterations = 100;
  /// Converged when the gradient infinity norm is below gradient_tolerance,
  /// or when the relative objective change is below relative_tolerance and
  /// the gradient is below flat_gradient_tolerance.
  double gradient_tolerance = 1e-11;
  double relative_tolerance = 1e-12;
  double flat_gradient_tolerance = 1e-7;
  double jitter = 1e-10;              // ridge added to singular normal equations
};

/// Newton / IRLS maximum likelihood. Throws FitError when the objective
/// becomes non-finite or the target is identically zero.
GlmFit fit_glm_poisson(const features::FeatureMatrix& m, const IrlsOptions& options = {});

struct ElasticNetOptions {
  int max_iterations = 10000;
  double objective_tolerance = 1e-10;
  /// Converged when the KKT residual is below kkt_tolerance, or when the
  /// objective change is below objective_tolerance (relative) and the residual
  /// is below flat_kkt_tolerance.
  double kkt_tolerance = 1e-9;
  double flat_kkt_tolerance = 1e-7;
  /// Starting point (intercept, coefficients); defaults to the intercept-only fit.
  std::optional<Eigen::VectorXd> warm_start;
};

/// Minimises mean NLL + eta * (alpha |beta|_1 + (1 - alpha)/2 |beta|_2^2) by
/// accelerated proximal gradient with backtracking and objective-monotone
/// restarts. The intercept is not penalised. Throws FitError on
/// non-convergence.
GlmFit fit_glm_elasticnet(const features::FeatureMatrix& m, double eta, double alpha,
                          const ElasticNetOptions& options = {});

/// Smallest eta at which the lasso-type problem with mix alpha keeps every
/// slope at zero: max_j |grad_j| / alpha at the intercept-only optimum.
double elasticnet_eta_max(const features::FeatureMatrix& m, double alpha);

/// Gradient of the mean NLL at (intercept, beta), intercept first.
Eigen::VectorXd glm_nll_gradient(const features::FeatureMatrix& m, double intercept,
                                 const Eigen::VectorXd& beta);

/// Largest violation of the elastic-net optimality conditions.
double elasticnet_kkt_residual(const features::FeatureMatrix& m, const GlmFit& fit);

/// X~^T diag(w) X~ / n with X~ = [1 X], computed in parallel over columns.
Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& w);

namespace reference {
Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& w);
}  // namespace reference

}  // namespace geofreq::models
