#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "geofreq/error.hpp"

namespace geofreq::models {

/// Mean Poisson negative log-likelihood. The ln(y!) term is constant in the
/// parameters; `includes_lgamma` records whether it was added.
struct PoissonLossValue {
  double value = 0.0;
  bool includes_lgamma = false;
};

/// (1/n) sum(mu - y ln mu [+ ln y!]). Throws DomainError if some mu <= 0.
PoissonLossValue poisson_nll(const Eigen::Ref<const Eigen::VectorXd>& y,
                             const Eigen::Ref<const Eigen::VectorXd>& mu, bool include_lgamma = false);

/// Same loss parametrised by the log-mean eta (mu = exp(eta)); objective form
/// used by the optimisers, without ln(y!).
double poisson_nll_from_eta(const Eigen::Ref<const Eigen::VectorXd>& y,
                            const Eigen::Ref<const Eigen::VectorXd>& eta);

struct ConvergenceRecord {
  int iterations = 0;
  double final_objective = 0.0;
  double gradient_norm = 0.0;  // infinity norm (KKT residual for penalised fits)
  bool converged = false;
  std::vector<double> objective_trace;  // objective after each iteration, starting point first
  std::vector<std::string> warnings;
};

/// A fit failed; carries what the optimiser had reached.
class FitError : public NumericError {
 public:
  FitError(const std::string& what, ConvergenceRecord record, Eigen::VectorXd last_iterate = {})
      : NumericError(what), record_(std::move(record)), last_iterate_(std::move(last_iterate)) {}
  const ConvergenceRecord& record() const { return record_; }
  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }

 private:
  ConvergenceRecord record_;
  Eigen::VectorXd last_iterate_;
};

}  // namespace geofreq::models
