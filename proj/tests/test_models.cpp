#include <doctest.h>

#include <cmath>

#include "geofreq/error.hpp"
#include "geofreq/models/gbt.hpp"
#include "geofreq/models/glm.hpp"
#include "geofreq/models/mlp.hpp"
#include "geofreq/models/model.hpp"
#include "geofreq/models/poisson.hpp"
#include "geofreq/synth.hpp"
#include "support.hpp"

using namespace geofreq;
using namespace geofreq::models;
using features::FeatureMatrix;

namespace {

/// random_matrix with counts drawn at log-rate b0 + X b.
FeatureMatrix with_counts(FeatureMatrix m, double b0, const std::vector<double>& b, std::uint64_t seed) {
  CounterRng rng(seed, 5);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double eta = b0;
    for (std::size_t j = 0; j < b.size(); ++j) eta += b[j] * m.values(i, static_cast<Eigen::Index>(j));
    m.target(i) = static_cast<double>(synth::poisson(rng, m.exposure(i) * std::exp(eta)));
  }
  return m;
}

FeatureMatrix problem(int n = 300, std::uint64_t seed = 1) {
  return with_counts(testing::random_matrix(n, 4, seed), -1.5, {0.4, -0.3, 0.0, 0.2}, seed);
}

}  // namespace

TEST_CASE("Poisson NLL examples") {
  Eigen::VectorXd y(3), mu(3);
  y << 0, 1, 2;
  mu << 1, 1, 1;
  CHECK(poisson_nll(y, mu).value == 1.0);
  CHECK(poisson_nll(y, mu, true).value == doctest::Approx(1.0 + std::log(2.0) / 3.0).epsilon(1e-15));
  CHECK(poisson_nll(y, mu, true).includes_lgamma);
  Eigen::VectorXd y2(1), mu2(1);
  y2 << 2;
  mu2 << 2;
  CHECK(poisson_nll(y2, mu2).value == doctest::Approx(2.0 - 2.0 * std::log(2.0)).epsilon(1e-15));
  CHECK(poisson_nll_from_eta(y2, mu2.array().log().matrix()) == doctest::Approx(2.0 - 2.0 * std::log(2.0)));
  mu2 << 0.0;
  CHECK_THROWS_AS(poisson_nll(y2, mu2), DomainError);
  CHECK_THROWS_AS(poisson_nll(y, mu2), DomainError);
}

TEST_CASE("IRLS matches closed forms") {
  SUBCASE("intercept only") {
    auto m = testing::random_matrix(50, 0, 3);
    m = with_counts(m, -1.0, {}, 3);
    const auto fit = fit_glm_poisson(m);
    CHECK(fit.intercept == doctest::Approx(std::log(m.target.sum() / m.exposure.sum())).epsilon(1e-12));
    CHECK(fit.convergence.converged);
  }
  SUBCASE("one binary covariate") {
    auto m = testing::random_matrix(80, 1, 4);
    for (Eigen::Index i = 0; i < m.rows(); ++i) m.values(i, 0) = i % 2;
    m = with_counts(m, -0.5, {0.7}, 4);
    double y0 = 0, e0 = 0, y1 = 0, e1 = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      (i % 2 ? y1 : y0) += m.target(i);
      (i % 2 ? e1 : e0) += m.exposure(i);
    }
    const auto fit = fit_glm_poisson(m);
    CHECK(fit.intercept == doctest::Approx(std::log(y0 / e0)).epsilon(1e-10));
    CHECK(fit.coefficients(0) == doctest::Approx(std::log((y1 / e1) / (y0 / e0))).epsilon(1e-10));
  }
}

TEST_CASE("IRLS scale behaviour") {
  const auto m = problem();
  const auto base = fit_glm_poisson(m);
  CHECK(base.convergence.gradient_norm <= 1e-8);
  CHECK(glm_nll_gradient(m, base.intercept, base.coefficients).lpNorm<Eigen::Infinity>() <= 1e-8);

  auto doubled = m;
  doubled.exposure *= 2.0;
  const auto d = fit_glm_poisson(doubled);
  CHECK(d.intercept == doctest::Approx(base.intercept - std::log(2.0)).epsilon(1e-9));
  CHECK(d.coefficients.isApprox(base.coefficients, 1e-9));

  auto scaled = m;
  scaled.values.col(1) *= 10.0;
  const auto s = fit_glm_poisson(scaled);
  CHECK(s.coefficients(1) * 10.0 == doctest::Approx(base.coefficients(1)).epsilon(1e-9));
  CHECK(s.intercept == doctest::Approx(base.intercept).epsilon(1e-9));

  auto zero = m;
  zero.target.setZero();
  CHECK_THROWS_AS(fit_glm_poisson(zero), FitError);
}

TEST_CASE("weighted Gram matrix") {
  const auto m = testing::random_matrix(500, 7, 6);
  const Eigen::VectorXd w = m.exposure;
  const auto g = weighted_gram(m.values, w);
  CHECK(g == reference::weighted_gram(m.values, w));
  Eigen::MatrixXd xt(m.rows(), m.cols() + 1);
  xt << Eigen::VectorXd::Ones(m.rows()), m.values;
  const Eigen::MatrixXd direct = xt.transpose() * w.asDiagonal() * xt / static_cast<double>(m.rows());
  CHECK(g.isApprox(direct, 1e-12));
}

TEST_CASE("elastic net optimality") {
  const auto m = problem(400, 2);
  for (double alpha : {0.0, 0.5, 1.0}) {
    for (double eta : {1e-3, 1e-2, 0.05}) {
      const auto fit = fit_glm_elasticnet(m, eta, alpha);
      CHECK(fit.convergence.converged);
      CHECK(elasticnet_kkt_residual(m, fit) <= 1e-7);
      const auto& t = fit.convergence.objective_trace;
      for (std::size_t k = 1; k < t.size(); ++k) CHECK(t[k] <= t[k - 1] + 1e-12 * std::abs(t[k - 1]));
    }
  }
}

TEST_CASE("elastic net path end points") {
  const auto m = problem(400, 3);
  for (double alpha : {0.5, 1.0}) {
    const double emax = elasticnet_eta_max(m, alpha);
    CHECK(emax > 0.0);
    const auto at = fit_glm_elasticnet(m, emax * 1.0001, alpha);
    CHECK(at.coefficients.cwiseAbs().maxCoeff() == 0.0);
    CHECK(at.intercept == doctest::Approx(std::log(m.target.sum() / m.exposure.sum())).epsilon(1e-9));
    const auto below = fit_glm_elasticnet(m, emax * 0.9, alpha);
    CHECK(below.coefficients.cwiseAbs().maxCoeff() > 0.0);
  }
  const auto irls = fit_glm_poisson(m);
  const auto tiny = fit_glm_elasticnet(m, 1e-12, 0.5);
  CHECK(tiny.intercept == doctest::Approx(irls.intercept).epsilon(1e-6));
  CHECK((tiny.coefficients - irls.coefficients).lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("elastic net solutions move continuously with eta") {
  const auto m = problem(300, 4);
  Eigen::VectorXd prev = fit_glm_elasticnet(m, 0.01, 0.5).coefficients;
  for (double eta = 0.0101; eta <= 0.0111; eta += 0.0001) {
    const auto c = fit_glm_elasticnet(m, eta, 0.5).coefficients;
    CHECK((c - prev).lpNorm<Eigen::Infinity>() <= 0.01);
    prev = c;
  }
  CHECK_THROWS_AS(fit_glm_elasticnet(m, -1.0, 0.5), DomainError);
  CHECK_THROWS_AS(fit_glm_elasticnet(m, 0.1, 1.5), DomainError);
}

TEST_CASE("best split matches exhaustive enumeration") {
  GbtConfig cfg;
  cfg.min_child_hessian = 0.5;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CounterRng rng(seed, 8);
    const int n = 60, p = 4;
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd g(n), h(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) x(i, j) = std::round(rng.uniform(0, 10));  // ties in values
      g(i) = rng.normal();
      h(i) = rng.uniform(0.1, 2.0);
    }
    std::vector<std::size_t> rows(n);
    for (int i = 0; i < n; ++i) rows[i] = static_cast<std::size_t>(i);
    const auto fast = best_split(x, rows, g, h, cfg);
    const auto slow = synth::oracle_best_split(x, g, h, cfg);
    const auto serial = reference::best_split(x, rows, g, h, cfg);
    REQUIRE(fast.has_value() == slow.has_value());
    REQUIRE(serial.has_value() == fast.has_value());
    if (!fast) continue;
    CHECK(fast->feature == slow->feature);
    CHECK(fast->threshold == slow->threshold);
    CHECK(fast->gain == doctest::Approx(slow->gain).epsilon(1e-10));
    CHECK(serial->feature == fast->feature);
    CHECK(serial->threshold == fast->threshold);
    CHECK(serial->gain == fast->gain);
  }
}

TEST_CASE("boosting lowers the training loss") {
  const auto m = problem(400, 5);
  GbtConfig cfg;
  cfg.rounds = 40;
  const auto model = fit_gbt_poisson(m, cfg);
  REQUIRE(model.training_nll.size() == 41);
  for (std::size_t k = 1; k < model.training_nll.size(); ++k) {
    CHECK(model.training_nll[k] <= model.training_nll[k - 1] + 1e-12);
  }
  CHECK(model.training_nll.back() < model.training_nll.front());
  for (const auto& t : model.trees) CHECK(t.depth() <= cfg.max_depth);

  cfg.rounds = 0;
  const auto flat = fit_gbt_poisson(m, cfg);
  CHECK(flat.base_score == doctest::Approx(std::log(m.target.sum() / m.exposure.sum())).epsilon(1e-14));
  const auto mu = predict(Model{flat}, m);
  CHECK(mu.sum() == doctest::Approx(m.target.sum()).epsilon(1e-12));

  cfg.max_depth = 0;
  CHECK_THROWS_AS(fit_gbt_poisson(m, cfg), DomainError);
}

TEST_CASE("MLP gradient matches finite differences") {
  const auto m = problem(40, 6);
  MlpConfig cfg;
  cfg.hidden = {5, 3};
  cfg.seed = 7;
  auto model = init_mlp(m.columns, cfg);
  CounterRng rng(7, 9);
  Eigen::VectorXd theta = model.parameters();
  for (Eigen::Index k = 0; k < theta.size(); ++k) theta(k) += 0.1 * rng.normal();
  model.set_parameters(theta);
  const auto lg = mlp_loss_and_gradient(model, m);
  CHECK(lg.gradient.size() == static_cast<Eigen::Index>(model.parameter_count()));
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    auto plus = theta, minus = theta;
    plus(k) += h;
    minus(k) -= h;
    model.set_parameters(plus);
    const double fp = mlp_loss_and_gradient(model, m).loss;
    model.set_parameters(minus);
    const double fm = mlp_loss_and_gradient(model, m).loss;
    CHECK(lg.gradient(k) == doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("MLP limits") {
  const auto m = problem(200, 7);
  MlpConfig cfg;
  cfg.hidden = {4};
  auto model = init_mlp(m.columns, cfg);
  model.set_parameters(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.parameter_count())));
  CHECK(predict(Model{model}, m).isApprox(m.exposure, 1e-15));

  MlpConfig linear;
  linear.hidden = {};
  linear.epochs = 20000;
  linear.step_size = 0.2;
  const auto net = fit_mlp_poisson(m, linear);
  const auto glm = fit_glm_poisson(m);
  const auto& head = net.layers.back();
  CHECK(head.bias(0) == doctest::Approx(glm.intercept).epsilon(1e-4));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    CHECK(head.weights(0, j) == doctest::Approx(glm.coefficients(j)).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("prediction checks the column schema") {
  const auto m = problem(100, 8);
  const Model glm = fit_glm_poisson(m);
  const auto mu = predict(glm, m);
  const auto& fit = std::get<GlmFit>(glm);
  CHECK(mu.isApprox((m.exposure.array() * fit.linear_predictor(m.values).array().exp()).matrix(), 1e-15));
  auto swapped = m;
  std::swap(swapped.columns[0], swapped.columns[1]);
  CHECK_THROWS_AS(predict(glm, swapped), DataError);
  auto fewer = m;
  fewer.columns.pop_back();
  fewer.values.conservativeResize(Eigen::NoChange, 3);
  CHECK_THROWS_AS(predict(glm, fewer), DataError);
}

TEST_CASE("model reports") {
  const auto m = problem(200, 9);
  const auto en = fit_glm_elasticnet(m, 0.02, 1.0);
  const auto text = report(Model{en});
  CHECK(family_name(Model{en}) == "glm_enet");
  CHECK(family_name(Model{fit_glm_poisson(m)}) == "glm");
  CHECK(text.find("family: glm_enet") != std::string::npos);
  CHECK(text.find("nonzero_coefficients:") != std::string::npos);
  CHECK(text.find("Intercept") != std::string::npos);
  for (Eigen::Index j = 0; j < en.coefficients.size(); ++j) {
    CHECK((text.find(m.columns[static_cast<std::size_t>(j)]) != std::string::npos) == (en.coefficients(j) != 0.0));
  }
  GbtConfig g;
  g.rounds = 3;
  CHECK(report(Model{fit_gbt_poisson(m, g)}).find("family: gbt") != std::string::npos);
}
