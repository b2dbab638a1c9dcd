#include "geofreq/models/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "geofreq/csv.hpp"

namespace geofreq::models {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

const std::vector<std::string>& columns_of(const Model& model) {
  return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.columns; }, model);
}

std::string num(double v) { return csv::format_double(v); }

void write_convergence(std::ostringstream& out, const ConvergenceRecord& c) {
  out << "convergence.iterations: " << c.iterations << '\n'
      << "convergence.converged: " << (c.converged ? "true" : "false") << '\n'
      << "convergence.final_objective: " << num(c.final_objective) << '\n'
      << "convergence.gradient_norm: " << num(c.gradient_norm) << '\n';
  for (const auto& w : c.warnings) out << "convergence.warning: " << w << '\n';
}

}  // namespace

Eigen::VectorXd predict(const Model& model, const features::FeatureMatrix& m) {
  if (columns_of(model) != m.columns) throw DataError("predict: feature columns differ from the training schema");
  const Eigen::VectorXd f = std::visit(
      Overloaded{[&](const GlmFit& g) { return g.linear_predictor(m.values); },
                 [&](const GbtModel& g) { return g.raw_score(m.values); },
                 [&](const MlpModel& g) { return g.raw_score(m.values); }},
      model);
  return (m.exposure.array() * f.array().exp()).matrix();
}

std::string family_name(const Model& model) {
  return std::visit(Overloaded{[](const GlmFit& g) { return std::string(g.eta > 0.0 ? "glm_enet" : "glm"); },
                               [](const GbtModel&) { return std::string("gbt"); },
                               [](const MlpModel&) { return std::string("mlp"); }},
                    model);
}

std::string report(const Model& model) {
  std::ostringstream out;
  out << "family: " << family_name(model) << '\n';
  std::visit(Overloaded{
                 [&](const GlmFit& g) {
                   out << "hyper.eta: " << num(g.eta) << '\n' << "hyper.alpha: " << num(g.alpha) << '\n';
                   write_convergence(out, g.convergence);
                   std::vector<std::pair<std::string, double>> coef{{"Intercept", g.intercept}};
                   for (Eigen::Index j = 0; j < g.coefficients.size(); ++j) {
                     if (g.coefficients(j) != 0.0) coef.emplace_back(g.columns[static_cast<std::size_t>(j)], g.coefficients(j));
                   }
                   std::stable_sort(coef.begin(), coef.end(), [](const auto& a, const auto& b) {
                     return std::abs(a.second) > std::abs(b.second);
                   });
                   out << "nonzero_coefficients: " << coef.size() << '\n';
                   for (const auto& [name, v] : coef) out << "  " << name << ' ' << num(v) << '\n';
                 },
                 [&](const GbtModel& g) {
                   out << "hyper.rounds: " << g.config.rounds << '\n'
                       << "hyper.max_depth: " << g.config.max_depth << '\n'
                       << "hyper.learning_rate: " << num(g.config.learning_rate) << '\n'
                       << "hyper.min_child_hessian: " << num(g.config.min_child_hessian) << '\n'
                       << "hyper.lambda_leaf: " << num(g.config.lambda_leaf) << '\n'
                       << "hyper.gamma: " << num(g.config.gamma) << '\n'
                       << "hyper.max_delta_step: " << num(g.config.max_delta_step) << '\n'
                       << "base_score: " << num(g.base_score) << '\n'
                       << "trees: " << g.trees.size() << '\n';
                   if (!g.training_nll.empty()) out << "final_training_nll: " << num(g.training_nll.back()) << '\n';
                 },
                 [&](const MlpModel& g) {
                   out << "hyper.hidden:";
                   for (int h : g.config.hidden) out << ' ' << h;
                   out << '\n'
                       << "hyper.epochs: " << g.config.epochs << '\n'
                       << "hyper.step_size: " << num(g.config.step_size) << '\n'
                       << "hyper.seed: " << g.config.seed << '\n'
                       << "parameters: " << g.parameter_count() << '\n';
                   if (!g.training_nll.empty()) out << "final_training_nll: " << num(g.training_nll.back()) << '\n';
                 }},
             model);
  return out.str();
}

}  // namespace geofreq::models
