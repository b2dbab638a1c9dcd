#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "geofreq/error.hpp"
#include "geofreq/features.hpp"
#include "geofreq/models/model.hpp"
#include "geofreq/zones.hpp"

namespace geofreq::eval {

inline constexpr int kOuterFolds = 6;
inline constexpr int kInnerFolds = 5;

/// Raised when no grid point can be fitted on the inner folds.
class SelectionError : public NumericError {
 public:
  using NumericError::NumericError;
};

struct FoldPlan {
  std::uint64_t seed = 0;
  std::string strat_variable = "freq";
  int strat_bins = 10;
  std::vector<int> outer;  // zone index -> outer fold
  /// inner[j][t] is the inner fold of the t-th training zone of outer fold j,
  /// training zones taken in ascending zone index.
  std::vector<std::vector<int>> inner;

  std::size_t zones() const { return outer.size(); }
  std::vector<std::size_t> test_rows(int fold) const;
  std::vector<std::size_t> train_rows(int fold) const;
  /// Zone indices used to fit (or validate) inner fold k of outer fold j.
  std::vector<std::size_t> inner_train_rows(int fold, int inner_fold) const;
  std::vector<std::size_t> inner_valid_rows(int fold, int inner_fold) const;
};

/// Assignment of n items to n_folds folds: rank by value (ties by id), cut
/// into strat_bins quantile bins, shuffle inside each bin and deal
/// round-robin with the position counter running across bins.
std::vector<int> stratified_assignment(std::span<const double> value, std::span<const std::string> ids,
                                       int n_folds, int strat_bins, std::uint64_t seed,
                                       std::uint64_t stream);

/// Throws DomainError with fewer zones than outer folds (or an outer
/// training set smaller than the inner fold count).
FoldPlan make_fold_plan(std::span<const double> freq, std::span<const std::string> ids, std::uint64_t seed,
                        int strat_bins = 10);
FoldPlan make_fold_plan(const zones::ZoneTable& zones, std::uint64_t seed, int strat_bins = 10);
/// Stratifies on target / exposure.
FoldPlan make_fold_plan(const features::FeatureMatrix& m, std::uint64_t seed, int strat_bins = 10);

/// Throws DomainError on empty or unequal inputs.
double rmse(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

enum class Family { Glm, Gbt, Mlp };

std::string family_label(Family f);
/// Accepts glm, gbt, mlp. Throws ConfigError otherwise.
Family parse_family(const std::string& name);

struct GlmParams {
  double eta = 0.0;
  double alpha = 0.0;
  bool operator==(const GlmParams&) const = default;
};
struct GbtParams {
  int max_depth = 3;
  double learning_rate = 0.1;
  int rounds = 100;
  bool operator==(const GbtParams&) const = default;
};
struct MlpParams {
  double step_size = 1e-2;
  std::vector<int> hidden{32, 16};
  bool operator==(const MlpParams&) const = default;
};
using HyperParams = std::variant<GlmParams, GbtParams, MlpParams>;

Family family_of(const HyperParams& p);
/// "eta=0.1;alpha=0.5", "depth=3;learning_rate=0.1;rounds=100", "step=0.01;hidden=32x16"
std::string label(const HyperParams& p);
/// Inverse of label for the given family. Throws ConfigError.
HyperParams parse_hyperparams(Family family, const std::string& text);

/// True when a is more strongly regularized than b: GLM larger eta then
/// larger alpha; GBT fewer rounds, then shallower, then smaller step; MLP
/// smaller step, then fewer hidden units.
bool more_regularized(const HyperParams& a, const HyperParams& b);

std::vector<HyperParams> default_grid(Family family);

/// Settings shared by every fit of an experiment.
struct FitSettings {
  models::IrlsOptions irls;
  models::ElasticNetOptions enet;
  models::GbtConfig gbt;  // depth, rate and rounds come from the grid
  models::MlpConfig mlp;  // step and hidden sizes come from the grid
  bool include_lgamma = false;  // in the reported test NLL
};

/// GLM with eta == 0 uses IRLS, otherwise the elastic net.
models::Model fit_with(const HyperParams& p, const features::FeatureMatrix& train, const FitSettings& settings = {});

/// Standardizes on train, fits, predicts the counts of test.
Eigen::VectorXd fit_predict(const HyperParams& p, const features::FeatureMatrix& train,
                            const features::FeatureMatrix& test, const FitSettings& settings = {});

struct InnerScore {
  HyperParams params;
  std::vector<double> rmse;  // per inner fold, empty if a fit failed
  double mean = 0.0;         // +inf when any inner fit failed
  std::string failure;
};

struct Selection {
  std::size_t index = 0;  // into the grid
  HyperParams params;
  std::vector<InnerScore> scores;
};

/// Picks the grid point with minimal mean inner RMSE, ties to the more
/// regularized point. `inner` assigns each row of train to an inner fold.
Selection inner_select(const features::FeatureMatrix& train, std::span<const int> inner,
                       const std::vector<HyperParams>& grid, const FitSettings& settings = {}, int jobs = 0);

struct FoldResult {
  int fold = 0;
  HyperParams params;
  double rmse = 0.0;
  double test_nll = 0.0;
  double runtime_seconds = 0.0;  // not serialized
  std::string model_report;      // models::report of the refit
  features::StandardizationParams standardization;
  std::vector<std::size_t> test_rows;
};

struct CvResult {
  Family family = Family::Glm;
  std::string features;  // spec label
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  double mean = 0.0;
  double sd = 0.0;  // sample SD (n - 1)
  bool nll_includes_lgamma = false;

  std::vector<double> rmses() const;
};

struct ExperimentOptions {
  Family family = Family::Glm;
  std::vector<HyperParams> grid;  // empty means default_grid(family)
  std::uint64_t seed = 0;
  int strat_bins = 10;
  int jobs = 0;  // 0 = OpenMP default, 1 = serial
  FitSettings settings;
  std::string features_label;
};

/// Nested cross-validation over the rows of m. Fit failures on an outer
/// refit propagate as NumericError naming the fold.
CvResult run_experiment(const features::FeatureMatrix& m, const ExperimentOptions& options);
CvResult run_experiment(const features::FeatureMatrix& m, const FoldPlan& plan, const ExperimentOptions& options);

/// Mean and sample SD of the given values.
std::pair<double, double> mean_sd(std::span<const double> v);

struct RobustnessReport {
  std::vector<CvResult> runs;  // one per seed, in the given order
  double avg_mean = 0.0;
  double avg_sd = 0.0;
};

/// Throws DomainError with fewer than two seeds.
RobustnessReport robustness_suite(const features::FeatureMatrix& m, const ExperimentOptions& options,
                                  std::span<const std::uint64_t> seeds);

/// Delimited: one row per fold (with hyperparameters and test NLL), then
/// mean and std rows.
void write_cv_result(std::ostream& out, const CvResult& r, char delimiter = ',', bool header = true);
/// Aligned text table: folds as columns, then Mean and std.
void write_cv_table(std::ostream& out, std::span<const CvResult> results);
/// Delimited: one row per seed with its fold RMSEs, Mean and std, then the averages.
void write_robustness(std::ostream& out, const RobustnessReport& r, char delimiter = ',');
void write_robustness_table(std::ostream& out, const RobustnessReport& r);
/// Concatenated model reports, one section per fold.
void write_fold_reports(std::ostream& out, const CvResult& r);

}  // namespace geofreq::eval
