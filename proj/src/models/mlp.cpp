#include "geofreq/models/mlp.hpp"

#include <cmath>

#include "geofreq/models/poisson.hpp"
#include "geofreq/rng.hpp"

namespace geofreq::models {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Activations {
  std::vector<MatrixXd> pre;   // per layer, rows x units
  std::vector<MatrixXd> post;  // inputs to each layer; post[0] = X
};

Activations forward(const MlpModel& model, const MatrixXd& x) {
  Activations a;
  a.post.push_back(x);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    MatrixXd z = a.post.back() * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    a.pre.push_back(z);
    if (l + 1 < model.layers.size()) a.post.push_back(z.cwiseMax(0.0));
  }
  return a;
}

}  // namespace

VectorXd MlpModel::raw_score(const MatrixXd& x) const { return forward(*this, x).pre.back().col(0); }

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

VectorXd MlpModel::parameters() const {
  VectorXd theta(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index k = 0;
  for (const auto& l : layers) {
    theta.segment(k, l.weights.size()) = l.weights.reshaped();
    k += l.weights.size();
    theta.segment(k, l.bias.size()) = l.bias;
    k += l.bias.size();
  }
  return theta;
}

void MlpModel::set_parameters(const VectorXd& theta) {
  if (theta.size() != static_cast<Eigen::Index>(parameter_count())) throw DomainError("MLP: parameter length mismatch");
  Eigen::Index k = 0;
  for (auto& l : layers) {
    l.weights.reshaped() = theta.segment(k, l.weights.size());
    k += l.weights.size();
    l.bias = theta.segment(k, l.bias.size());
    k += l.bias.size();
  }
}

MlpModel init_mlp(std::vector<std::string> columns, const MlpConfig& config) {
  MlpModel model;
  model.config = config;
  std::vector<int> sizes{static_cast<int>(columns.size())};
  for (int h : config.hidden) {
    if (h < 1) throw DomainError("MLP: hidden layer sizes must be positive");
    sizes.push_back(h);
  }
  sizes.push_back(1);
  model.columns = std::move(columns);
  CounterRng rng(config.seed, 0x6d6c70);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    const int fan_in = sizes[l];
    const double bound = fan_in > 0 ? 1.0 / std::sqrt(static_cast<double>(fan_in)) : 0.0;
    layer.weights.resize(sizes[l + 1], fan_in);
    for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) layer.weights(r, c) = rng.uniform(-bound, bound);
    }
    layer.bias = VectorXd::Zero(sizes[l + 1]);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

LossAndGradient mlp_loss_and_gradient(const MlpModel& model, const features::FeatureMatrix& m) {
  const auto acts = forward(model, m.values);
  const VectorXd eta = m.offset() + acts.pre.back().col(0);
  const VectorXd mu = eta.array().exp();
  const double n = static_cast<double>(m.rows());
  LossAndGradient out;
  out.loss = poisson_nll_from_eta(m.target, eta);

  std::vector<DenseLayer> grads(model.layers.size());
  MatrixXd delta = (mu - m.target) / n;  // d loss / d head, rows x 1
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    grads[l].weights = delta.transpose() * acts.post[l];
    grads[l].bias = delta.colwise().sum().transpose();
    if (l > 0) {
      MatrixXd back = delta * model.layers[l].weights;
      back.array() *= (acts.pre[l - 1].array() > 0.0).cast<double>();
      delta = std::move(back);
    }
  }
  out.gradient.resize(static_cast<Eigen::Index>(model.parameter_count()));
  Eigen::Index k = 0;
  for (const auto& g : grads) {
    out.gradient.segment(k, g.weights.size()) = g.weights.reshaped();
    k += g.weights.size();
    out.gradient.segment(k, g.bias.size()) = g.bias;
    k += g.bias.size();
  }
  return out;
}

MlpModel fit_mlp_poisson(const features::FeatureMatrix& m, const MlpConfig& config) {
  ConvergenceRecord rec;
  if (m.rows() == 0) throw FitError("MLP: empty training set", rec);
  if (m.target.sum() <= 0.0) throw FitError("MLP: all-zero target", rec);
  if (config.epochs < 0 || !(config.step_size > 0.0)) throw DomainError("MLP: invalid training schedule");
  MlpModel model = init_mlp(m.columns, config);
  model.layers.back().bias(0) = std::log(m.target.sum() / m.exposure.sum());

  VectorXd theta = model.parameters();
  for (int epoch = 0; epoch <= config.epochs; ++epoch) {
    model.set_parameters(theta);
    const auto lg = mlp_loss_and_gradient(model, m);
    if (!std::isfinite(lg.loss) || !lg.gradient.allFinite()) {
      rec.iterations = epoch;
      rec.objective_trace = model.training_nll;
      throw FitError("MLP: non-finite loss at epoch " + std::to_string(epoch), rec, theta);
    }
    model.training_nll.push_back(lg.loss);
    if (epoch == config.epochs) break;
    theta -= config.step_size * lg.gradient;
  }
  return model;
}

}  // namespace geofreq::models
