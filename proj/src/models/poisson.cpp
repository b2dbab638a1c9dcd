#include "geofreq/models/poisson.hpp"

#include <cmath>

#include "geofreq/numeric.hpp"

namespace geofreq::models {

PoissonLossValue poisson_nll(const Eigen::Ref<const Eigen::VectorXd>& y,
                             const Eigen::Ref<const Eigen::VectorXd>& mu, bool include_lgamma) {
  if (y.size() != mu.size()) throw DomainError("poisson_nll: length mismatch");
  if (y.size() == 0) throw DomainError("poisson_nll: empty input");
  CompensatedSum s;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!(mu(i) > 0.0) || !std::isfinite(mu(i))) throw DomainError("poisson_nll: mu must be positive and finite");
    double term = mu(i) - (y(i) == 0.0 ? 0.0 : y(i) * std::log(mu(i)));
    if (include_lgamma) term += std::lgamma(y(i) + 1.0);
    s.add(term);
  }
  return {s.value() / static_cast<double>(y.size()), include_lgamma};
}

double poisson_nll_from_eta(const Eigen::Ref<const Eigen::VectorXd>& y,
                            const Eigen::Ref<const Eigen::VectorXd>& eta) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += std::exp(eta(i)) - y(i) * eta(i);
  return s / static_cast<double>(y.size());
}

}  // namespace geofreq::models
