#include "geofreq/models/glm.hpp"

#include "geofreq/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace geofreq::models {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double gram_entry(const MatrixXd& x, const VectorXd& w, Eigen::Index j, Eigen::Index k) {
  double s = 0.0;
  const auto n = x.rows();
  if (j == 0 && k == 0) {
    for (Eigen::Index i = 0; i < n; ++i) s += w(i);
  } else if (j == 0) {
    for (Eigen::Index i = 0; i < n; ++i) s += w(i) * x(i, k - 1);
  } else {
    for (Eigen::Index i = 0; i < n; ++i) s += w(i) * x(i, j - 1) * x(i, k - 1);
  }
  return s / static_cast<double>(n);
}

/// eta = offset + intercept + X beta
VectorXd margin(const features::FeatureMatrix& m, const VectorXd& offset, const VectorXd& theta) {
  VectorXd eta = offset.array() + theta(0);
  if (m.cols() > 0) eta.noalias() += m.values * theta.tail(m.cols());
  return eta;
}

VectorXd gradient_at(const features::FeatureMatrix& m, const VectorXd& y, const VectorXd& mu) {
  const VectorXd resid = mu - y;
  VectorXd g(m.cols() + 1);
  const double n = static_cast<double>(m.rows());
  g(0) = resid.sum() / n;
  if (m.cols() > 0) g.tail(m.cols()).noalias() = m.values.transpose() * resid / n;
  return g;
}

void check_inputs(const features::FeatureMatrix& m, ConvergenceRecord& rec) {
  if (m.rows() == 0) throw FitError("GLM: empty training set", rec);
  if (m.target.sum() <= 0.0) throw FitError("GLM: all-zero target, intercept diverges to -inf", rec);
  if (m.cols() >= m.rows()) rec.warnings.push_back("more columns than rows");
}

GlmFit package(const features::FeatureMatrix& m, const VectorXd& theta, ConvergenceRecord rec) {
  GlmFit fit;
  fit.columns = m.columns;
  fit.intercept = theta(0);
  fit.coefficients = theta.tail(m.cols());
  fit.convergence = std::move(rec);
  return fit;
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace

VectorXd GlmFit::linear_predictor(const MatrixXd& x) const {
  VectorXd f = VectorXd::Constant(x.rows(), intercept);
  if (coefficients.size() > 0) f.noalias() += x * coefficients;
  return f;
}

MatrixXd weighted_gram(const MatrixXd& x, const VectorXd& w) {
  const auto p = x.cols() + 1;
  MatrixXd h(p, p);
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = j; k < p; ++k) h(j, k) = gram_entry(x, w, j, k);
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = 0; k < j; ++k) h(j, k) = h(k, j);
  }
  return h;
}

namespace reference {
MatrixXd weighted_gram(const MatrixXd& x, const VectorXd& w) {
  const auto p = x.cols() + 1;
  MatrixXd h(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = j; k < p; ++k) h(j, k) = h(k, j) = gram_entry(x, w, j, k);
  }
  return h;
}
}  // namespace reference

GlmFit fit_glm_poisson(const features::FeatureMatrix& m, const IrlsOptions& options) {
  ConvergenceRecord rec;
  check_inputs(m, rec);
  const VectorXd offset = m.offset();
  const VectorXd& y = m.target;
  const auto p = m.cols() + 1;

  VectorXd theta = VectorXd::Zero(p);
  theta(0) = std::log(y.sum() / m.exposure.sum());
  VectorXd eta = margin(m, offset, theta);
  double obj = poisson_nll_from_eta(y, eta);
  rec.objective_trace.push_back(obj);
  bool jitter_warned = false;

  for (int it = 1; it <= options.max_iterations; ++it) {
    const VectorXd mu = eta.array().exp();
    const VectorXd g = gradient_at(m, y, mu);
    rec.gradient_norm = g.lpNorm<Eigen::Infinity>();
    if (rec.gradient_norm < options.gradient_tolerance) {
      rec.converged = true;
      break;
    }
    MatrixXd h = weighted_gram(m.values, mu);
    Eigen::LDLT<MatrixXd> ldlt(h);
    const auto d = ldlt.vectorD().cwiseAbs();
    const bool singular = ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
                          d.minCoeff() <= 1e-13 * std::max(1.0, d.maxCoeff());
    if (singular) {
      if (!jitter_warned) {
        rec.warnings.push_back("singular normal equations; ridge jitter applied");
        jitter_warned = true;
      }
      h.diagonal().array() += options.jitter;
      ldlt.compute(h);
    }
    const VectorXd step = ldlt.solve(-g);

    double scale = 1.0;
    VectorXd next = theta + step;
    VectorXd next_eta = margin(m, offset, next);
    double next_obj = poisson_nll_from_eta(y, next_eta);
    while (!(next_obj <= obj) && scale > 1e-10) {
      scale /= 2.0;
      next = theta + scale * step;
      next_eta = margin(m, offset, next);
      next_obj = poisson_nll_from_eta(y, next_eta);
    }
    rec.iterations = it;
    if (!std::isfinite(next_obj)) {
      rec.final_objective = obj;
      throw FitError("GLM: objective became non-finite at iteration " + std::to_string(it), rec, theta);
    }
    if (!(next_obj <= obj)) {
      // No descent possible along the Newton direction: at the floating-point optimum.
      rec.converged = true;
      break;
    }
    const double change = std::abs(obj - next_obj) / std::max(1.0, std::abs(obj));
    theta = next;
    eta = next_eta;
    obj = next_obj;
    rec.objective_trace.push_back(obj);
    if (change < options.relative_tolerance) {
      const VectorXd g_new = gradient_at(m, y, eta.array().exp().matrix());
      rec.gradient_norm = g_new.lpNorm<Eigen::Infinity>();
      if (rec.gradient_norm <= options.flat_gradient_tolerance) {
        rec.converged = true;
        break;
      }
    }
  }
  if (!theta.allFinite()) throw FitError("GLM: non-finite coefficients", rec, theta);
  rec.final_objective = obj;
  if (!rec.converged) rec.warnings.push_back("IRLS stopped at the iteration limit");
  return package(m, theta, std::move(rec));
}

Eigen::VectorXd glm_nll_gradient(const features::FeatureMatrix& m, double intercept, const VectorXd& beta) {
  VectorXd theta(m.cols() + 1);
  theta(0) = intercept;
  theta.tail(m.cols()) = beta;
  const VectorXd mu = margin(m, m.offset(), theta).array().exp();
  return gradient_at(m, m.target, mu);
}

double elasticnet_eta_max(const features::FeatureMatrix& m, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("eta_max is defined for alpha in (0, 1]");
  const double b0 = std::log(m.target.sum() / m.exposure.sum());
  const VectorXd g = glm_nll_gradient(m, b0, VectorXd::Zero(m.cols()));
  return m.cols() == 0 ? 0.0 : g.tail(m.cols()).lpNorm<Eigen::Infinity>() / alpha;
}

double elasticnet_kkt_residual(const features::FeatureMatrix& m, const GlmFit& fit) {
  const VectorXd g = glm_nll_gradient(m, fit.intercept, fit.coefficients);
  double worst = std::abs(g(0));
  const double l1 = fit.eta * fit.alpha;
  const double l2 = fit.eta * (1.0 - fit.alpha);
  for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
    const double b = fit.coefficients(j);
    const double smooth = g(j + 1) + l2 * b;
    const double r = b != 0.0 ? std::abs(smooth + l1 * (b > 0.0 ? 1.0 : -1.0))
                              : std::max(0.0, std::abs(smooth) - l1);
    worst = std::max(worst, r);
  }
  return worst;
}

GlmFit fit_glm_elasticnet(const features::FeatureMatrix& m, double eta, double alpha,
                          const ElasticNetOptions& options) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("elastic net: eta must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("elastic net: alpha must lie in [0, 1]");
  ConvergenceRecord rec;
  check_inputs(m, rec);
  const VectorXd offset = m.offset();
  const VectorXd& y = m.target;
  const auto p = m.cols() + 1;
  const double l1 = eta * alpha;
  const double l2 = eta * (1.0 - alpha);

  // Iterate with its margin so objective differences can be formed term by
  // term: near the optimum the change is far below the rounding of the
  // objective itself.
  struct Point {
    VectorXd theta;
    VectorXd eta;
    double f = 0.0;  // smooth part
  };
  auto make_point = [&](VectorXd theta) {
    Point pt{std::move(theta), {}, 0.0};
    pt.eta = margin(m, offset, pt.theta);
    pt.f = poisson_nll_from_eta(y, pt.eta) + 0.5 * l2 * pt.theta.tail(p - 1).squaredNorm();
    return pt;
  };
  auto smooth_grad = [&](const Point& pt) {
    VectorXd g = gradient_at(m, y, pt.eta.array().exp().matrix());
    g.tail(p - 1) += l2 * pt.theta.tail(p - 1);
    return g;
  };
  auto smooth_delta = [&](const Point& a, const Point& b) {
    const VectorXd step_theta = b.theta - a.theta;
    VectorXd d = VectorXd::Constant(y.size(), step_theta(0));
    if (p > 1) d.noalias() += m.values * step_theta.tail(p - 1);
    CompensatedSum sum;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      sum.add(std::exp(a.eta(i)) * std::expm1(d(i)) - y(i) * d(i));
    }
    const double tail = (b.theta.tail(p - 1) - a.theta.tail(p - 1)).dot(b.theta.tail(p - 1) + a.theta.tail(p - 1));
    return sum.value() / static_cast<double>(y.size()) + 0.5 * l2 * tail;
  };
  auto penalty = [&](const VectorXd& theta) { return l1 * theta.tail(p - 1).lpNorm<1>(); };
  auto objective_delta = [&](const Point& a, const Point& b) {
    return smooth_delta(a, b) + (penalty(b.theta) - penalty(a.theta));
  };
  auto prox = [&](const VectorXd& z, double t) {
    VectorXd out = z;
    for (Eigen::Index j = 1; j < p; ++j) out(j) = soft_threshold(z(j), t * l1);
    return out;
  };
  auto kkt = [&](const VectorXd& theta, const VectorXd& grad) {
    double worst = std::abs(grad(0));
    for (Eigen::Index j = 1; j < p; ++j) {
      const double b = theta(j);
      const double r = b != 0.0 ? std::abs(grad(j) + l1 * (b > 0.0 ? 1.0 : -1.0))
                                : std::max(0.0, std::abs(grad(j)) - l1);
      worst = std::max(worst, r);
    }
    return worst;
  };

  VectorXd start = VectorXd::Zero(p);
  start(0) = std::log(y.sum() / m.exposure.sum());
  if (options.warm_start) {
    if (options.warm_start->size() != p) throw DomainError("elastic net: warm start has the wrong length");
    start = *options.warm_start;
  }
  Point x = make_point(start);
  if (!std::isfinite(x.f)) throw FitError("elastic net: objective is non-finite at the start", rec, x.theta);
  VectorXd grad_x = smooth_grad(x);
  double obj = x.f + penalty(x.theta);
  rec.objective_trace.push_back(obj);

  // Initial step from the curvature at the start: 1 / trace bound of the Hessian.
  const VectorXd mu0 = x.eta.array().exp();
  double lipschitz = mu0.sum() / static_cast<double>(m.rows());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    lipschitz += (mu0.array() * m.values.col(j).array().square()).sum() / static_cast<double>(m.rows());
  }
  double step = 1.0 / (lipschitz + l2);

  Point y_pt = x;
  VectorXd grad_y = grad_x;
  double momentum = 1.0;
  rec.gradient_norm = kkt(x.theta, grad_x);
  if (rec.gradient_norm <= options.kkt_tolerance) rec.converged = true;

  auto prox_step = [&](const Point& from, const VectorXd& g_from, double& t) {
    while (true) {
      Point cand = make_point(prox(from.theta - t * g_from, t));
      const VectorXd diff = cand.theta - from.theta;
      if (std::isfinite(cand.f) && smooth_delta(from, cand) <= g_from.dot(diff) + diff.squaredNorm() / (2.0 * t)) {
        return cand;
      }
      t /= 2.0;
      if (t < 1e-300) throw FitError("elastic net: line search failed", rec, from.theta);
    }
  };

  for (int it = 1; !rec.converged && it <= options.max_iterations; ++it) {
    step *= 1.25;
    Point cand = prox_step(y_pt, grad_y, step);
    double delta = objective_delta(x, cand);
    if (delta > 0.0) {
      // Momentum overshot: restart from the last accepted iterate.
      momentum = 1.0;
      cand = prox_step(x, grad_x, step);
      delta = objective_delta(x, cand);
      if (delta > 0.0) {
        cand = x;
        delta = 0.0;
      }
    }
    const double next_momentum = (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0;
    const Point prev = std::move(x);
    x = std::move(cand);
    grad_x = smooth_grad(x);
    obj = x.f + penalty(x.theta);
    rec.objective_trace.push_back(obj);
    rec.iterations = it;
    if (!std::isfinite(obj)) throw FitError("elastic net: objective became non-finite", rec, prev.theta);

    y_pt = make_point(x.theta + ((momentum - 1.0) / next_momentum) * (x.theta - prev.theta));
    momentum = next_momentum;
    if (std::isfinite(y_pt.f)) {
      grad_y = smooth_grad(y_pt);
    } else {
      y_pt = x;
      grad_y = grad_x;
      momentum = 1.0;
    }

    rec.gradient_norm = kkt(x.theta, grad_x);
    const bool objective_flat = -delta < options.objective_tolerance * std::max(1.0, std::abs(obj));
    if (rec.gradient_norm <= options.kkt_tolerance ||
        (objective_flat && rec.gradient_norm <= options.flat_kkt_tolerance)) {
      rec.converged = true;
    }
  }
  rec.final_objective = obj;
  if (!rec.converged) {
    throw FitError("elastic net: no convergence after " + std::to_string(options.max_iterations) +
                       " iterations (KKT residual " + std::to_string(rec.gradient_norm) + ")",
                   rec, x.theta);
  }
  GlmFit fit = package(m, x.theta, std::move(rec));
  fit.eta = eta;
  fit.alpha = alpha;
  return fit;
}

}  // namespace geofreq::models
