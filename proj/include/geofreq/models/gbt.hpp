#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geofreq/features.hpp"

namespace geofreq::models {

struct GbtConfig {
  int rounds = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  double min_child_hessian = 1.0;
  double lambda_leaf = 1.0;  // L2 penalty on leaf weights
  double gamma = 0.0;        // minimum gain to split
  /// Leaf weights are clipped to +-max_delta_step before shrinkage (0 = off).
  /// Keeps Newton steps on the exp link from overshooting.
  double max_delta_step = 0.7;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // rows with x < threshold go left
  int left = -1;
  int right = -1;
  double weight = 0.0;  // leaf value before shrinkage
};

struct Tree {
  std::vector<TreeNode> nodes;  // root first

  double evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  int depth() const;
};

/// Second-order boosted regression trees on the Poisson log link.
struct GbtModel {
  std::vector<std::string> columns;
  GbtConfig config;
  double base_score = 0.0;  // ln(sum y / sum e)
  std::vector<Tree> trees;
  std::vector<double> training_nll;  // mean NLL after each round, base model first

  /// base_score + learning_rate * sum of trees (without the offset).
  Eigen::VectorXd raw_score(const Eigen::MatrixXd& x) const;
};

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;  // includes the -gamma term
};

/// Exact greedy search over the given rows. Returns the best split with gain
/// > 0 honouring min_child_hessian, or nullopt. Ties go to the lowest column,
/// then the lowest threshold. Columns are searched in parallel.
std::optional<SplitCandidate> best_split(const Eigen::MatrixXd& x, std::span<const std::size_t> rows,
                                         const Eigen::VectorXd& grad, const Eigen::VectorXd& hess,
                                         const GbtConfig& config);

namespace reference {
std::optional<SplitCandidate> best_split(const Eigen::MatrixXd& x, std::span<const std::size_t> rows,
                                         const Eigen::VectorXd& grad, const Eigen::VectorXd& hess,
                                         const GbtConfig& config);
}  // namespace reference

/// Throws DomainError on an invalid config, FitError on an empty training set
/// or a non-finite margin (the message names the round).
GbtModel fit_gbt_poisson(const features::FeatureMatrix& m, const GbtConfig& config = {});

}  // namespace geofreq::models
