#include "geofreq/models/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "geofreq/models/poisson.hpp"

namespace geofreq::models {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double leaf_score(double g, double h, double lambda) { return g * g / (h + lambda); }

std::vector<std::size_t> sorted_by_column(const MatrixXd& x, int col, std::span<const std::size_t> rows) {
  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x(a, col) < x(b, col); });
  return order;
}

/// Best threshold of one column; `order` lists the node's rows by ascending value.
std::optional<SplitCandidate> scan_column(const MatrixXd& x, int col, std::span<const std::size_t> order,
                                          const VectorXd& grad, const VectorXd& hess, const GbtConfig& cfg) {
  double g_total = 0.0, h_total = 0.0;
  for (auto r : order) {
    g_total += grad(r);
    h_total += hess(r);
  }
  const double parent = leaf_score(g_total, h_total, cfg.lambda_leaf);
  std::optional<SplitCandidate> best;
  double g_left = 0.0, h_left = 0.0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    g_left += grad(order[k]);
    h_left += hess(order[k]);
    const double v = x(order[k], col);
    const double v_next = x(order[k + 1], col);
    if (!(v < v_next)) continue;
    const double h_right = h_total - h_left;
    if (h_left < cfg.min_child_hessian || h_right < cfg.min_child_hessian) continue;
    const double g_right = g_total - g_left;
    const double gain = 0.5 * (leaf_score(g_left, h_left, cfg.lambda_leaf) +
                               leaf_score(g_right, h_right, cfg.lambda_leaf) - parent) -
                        cfg.gamma;
    if (gain > 0.0 && (!best || gain > best->gain)) best = SplitCandidate{col, v + (v_next - v) / 2.0, gain};
  }
  return best;
}

std::optional<SplitCandidate> reduce(const std::vector<std::optional<SplitCandidate>>& per_column) {
  std::optional<SplitCandidate> best;
  for (const auto& c : per_column) {
    if (c && (!best || c->gain > best->gain)) best = c;
  }
  return best;
}

void validate_config(const GbtConfig& c) {
  if (c.rounds < 0) throw DomainError("GBT: rounds must be >= 0");
  if (c.max_depth < 1) throw DomainError("GBT: depth must be >= 1");
  if (!(c.learning_rate > 0.0 && c.learning_rate <= 1.0)) throw DomainError("GBT: learning rate must lie in (0, 1]");
  if (!(c.lambda_leaf >= 0.0) || !(c.gamma >= 0.0) || !(c.min_child_hessian >= 0.0) || !(c.max_delta_step >= 0.0)) {
    throw DomainError("GBT: penalties must be non-negative");
  }
}

double leaf_weight(double g, double h, const GbtConfig& cfg) {
  double w = -g / (h + cfg.lambda_leaf);
  if (cfg.max_delta_step > 0.0) w = std::clamp(w, -cfg.max_delta_step, cfg.max_delta_step);
  return w;
}

/// Column orders of all training rows, sorted once per fit and filtered per node.
struct Presorted {
  std::vector<std::vector<std::size_t>> by_column;

  explicit Presorted(const MatrixXd& x) : by_column(static_cast<std::size_t>(x.cols())) {
    std::vector<std::size_t> all(static_cast<std::size_t>(x.rows()));
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (int j = 0; j < static_cast<int>(x.cols()); ++j) by_column[static_cast<std::size_t>(j)] = sorted_by_column(x, j, all);
  }
};

std::optional<SplitCandidate> node_split(const MatrixXd& x, const Presorted& presorted,
                                         const std::vector<char>& in_node, const VectorXd& grad,
                                         const VectorXd& hess, const GbtConfig& cfg) {
  const auto p = static_cast<int>(x.cols());
  std::vector<std::optional<SplitCandidate>> per_column(static_cast<std::size_t>(p));
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < p; ++j) {
    std::vector<std::size_t> order;
    for (auto r : presorted.by_column[static_cast<std::size_t>(j)]) {
      if (in_node[r]) order.push_back(r);
    }
    per_column[static_cast<std::size_t>(j)] = scan_column(x, j, order, grad, hess, cfg);
  }
  return reduce(per_column);
}

Tree grow_tree(const MatrixXd& x, const Presorted& presorted, const VectorXd& grad, const VectorXd& hess,
               const GbtConfig& cfg) {
  Tree tree;
  std::vector<char> in_node(static_cast<std::size_t>(x.rows()), 0);
  std::vector<std::size_t> all(static_cast<std::size_t>(x.rows()));
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::function<int(std::vector<std::size_t>, int)> build = [&](std::vector<std::size_t> rows, int depth) -> int {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::optional<SplitCandidate> split;
    if (depth < cfg.max_depth && rows.size() >= 2) {
      for (auto r : rows) in_node[r] = 1;
      split = node_split(x, presorted, in_node, grad, hess, cfg);
      for (auto r : rows) in_node[r] = 0;
    }
    if (!split) {
      double g = 0.0, h = 0.0;
      for (auto r : rows) {
        g += grad(r);
        h += hess(r);
      }
      tree.nodes[id].weight = leaf_weight(g, h, cfg);
      return id;
    }
    std::vector<std::size_t> left, right;
    for (auto r : rows) (x(r, split->feature) < split->threshold ? left : right).push_back(r);
    tree.nodes[id].feature = split->feature;
    tree.nodes[id].threshold = split->threshold;
    const int l = build(std::move(left), depth + 1);
    const int r = build(std::move(right), depth + 1);
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  };
  build(all, 0);
  return tree;
}

}  // namespace

double Tree::evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int id = 0;
  while (nodes[id].feature >= 0) {
    id = x(nodes[id].feature) < nodes[id].threshold ? nodes[id].left : nodes[id].right;
  }
  return nodes[id].weight;
}

int Tree::depth() const {
  std::function<int(int)> d = [&](int id) -> int {
    if (nodes[id].feature < 0) return 0;
    return 1 + std::max(d(nodes[id].left), d(nodes[id].right));
  };
  return nodes.empty() ? 0 : d(0);
}

VectorXd GbtModel::raw_score(const MatrixXd& x) const {
  VectorXd f = VectorXd::Constant(x.rows(), base_score);
  for (const auto& t : trees) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) f(i) += config.learning_rate * t.evaluate(x.row(i));
  }
  return f;
}

std::optional<SplitCandidate> best_split(const MatrixXd& x, std::span<const std::size_t> rows, const VectorXd& grad,
                                         const VectorXd& hess, const GbtConfig& config) {
  const auto p = static_cast<int>(x.cols());
  std::vector<std::optional<SplitCandidate>> per_column(static_cast<std::size_t>(p));
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < p; ++j) {
    per_column[static_cast<std::size_t>(j)] = scan_column(x, j, sorted_by_column(x, j, rows), grad, hess, config);
  }
  return reduce(per_column);
}

namespace reference {
std::optional<SplitCandidate> best_split(const MatrixXd& x, std::span<const std::size_t> rows, const VectorXd& grad,
                                         const VectorXd& hess, const GbtConfig& config) {
  std::optional<SplitCandidate> best;
  for (int j = 0; j < static_cast<int>(x.cols()); ++j) {
    const auto c = scan_column(x, j, sorted_by_column(x, j, rows), grad, hess, config);
    if (c && (!best || c->gain > best->gain)) best = c;
  }
  return best;
}
}  // namespace reference

GbtModel fit_gbt_poisson(const features::FeatureMatrix& m, const GbtConfig& config) {
  validate_config(config);
  ConvergenceRecord rec;
  if (m.rows() == 0) throw FitError("GBT: empty training set", rec);
  if (m.target.sum() <= 0.0) throw FitError("GBT: all-zero target, base score diverges", rec);
  GbtModel model;
  model.columns = m.columns;
  model.config = config;
  model.base_score = std::log(m.target.sum() / m.exposure.sum());

  const Presorted presorted(m.values);
  VectorXd margin = m.offset().array() + model.base_score;
  model.training_nll.push_back(poisson_nll_from_eta(m.target, margin));
  for (int round = 0; round < config.rounds; ++round) {
    const VectorXd mu = margin.array().exp();
    const VectorXd grad = mu - m.target;
    const VectorXd& hess = mu;
    Tree tree = grow_tree(m.values, presorted, grad, hess, config);
    for (Eigen::Index i = 0; i < m.rows(); ++i) margin(i) += config.learning_rate * tree.evaluate(m.values.row(i));
    if (!margin.allFinite()) {
      throw FitError("GBT: non-finite margin in round " + std::to_string(round + 1), rec);
    }
    model.trees.push_back(std::move(tree));
    model.training_nll.push_back(poisson_nll_from_eta(m.target, margin));
  }
  return model;
}

}  // namespace geofreq::models
