#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>

#include "geofreq/features.hpp"
#include "geofreq/models/gbt.hpp"
#include "geofreq/models/glm.hpp"
#include "geofreq/models/mlp.hpp"

namespace geofreq::models {

using Model = std::variant<GlmFit, GbtModel, MlpModel>;

/// mu_i = e_i * exp(f(x_i)). Throws DataError when the matrix columns differ
/// from the training schema (names or order).
Eigen::VectorXd predict(const Model& model, const features::FeatureMatrix& m);

std::string family_name(const Model& model);

/// Structured text summary: family, hyperparameters, convergence record and,
/// for GLMs, the non-zero coefficients sorted by magnitude.
std::string report(const Model& model);

}  // namespace geofreq::models
