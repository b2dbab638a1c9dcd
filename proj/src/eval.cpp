#include "geofreq/eval.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "geofreq/csv.hpp"
#include "geofreq/rng.hpp"

namespace geofreq::eval {
namespace {

constexpr std::uint64_t kOuterStream = 0x6f75746572;
constexpr std::uint64_t kInnerStream = 0x696e6e6572;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

int thread_count(int jobs) { return jobs > 0 ? jobs : omp_get_max_threads(); }

std::string num(double v) { return csv::format_double(v); }

std::vector<std::size_t> rows_where(std::span<const int> assignment, auto pred) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (pred(assignment[i])) rows.push_back(i);
  }
  return rows;
}

std::map<std::string, std::string> split_pairs(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = csv::trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("hyperparameter '" + item + "' is not key=value");
    out[csv::trim(item.substr(0, eq))] = csv::trim(item.substr(eq + 1));
  }
  return out;
}

double get_double(const std::map<std::string, std::string>& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  const auto v = csv::parse_double(it->second);
  if (!v) throw ConfigError("hyperparameter " + key + ": not a number: " + it->second);
  return *v;
}

int get_int(const std::map<std::string, std::string>& kv, const std::string& key, int fallback) {
  const double v = get_double(kv, key, fallback);
  if (v != std::floor(v)) throw ConfigError("hyperparameter " + key + " must be an integer");
  return static_cast<int>(v);
}

/// One fit on the inner training rows, scored on the inner validation rows.
struct Task {
  std::size_t fold = 0;  // index of the training matrix
  std::size_t grid = 0;
  int inner = 0;
};

struct TaskOutcome {
  double rmse = 0.0;
  bool ok = false;
  std::string failure;
  double seconds = 0.0;
};

std::vector<TaskOutcome> run_tasks(std::span<const features::FeatureMatrix> trains,
                                   std::span<const std::vector<int>> inner, std::span<const Task> tasks,
                                   const std::vector<HyperParams>& grid, const FitSettings& settings, int jobs) {
  std::vector<TaskOutcome> outcomes(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  const auto n = static_cast<std::ptrdiff_t>(tasks.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(jobs)) if (jobs != 1)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const Task& task = tasks[static_cast<std::size_t>(t)];
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto& assignment = inner[task.fold];
      const auto fit_rows = rows_where(assignment, [&](int f) { return f != task.inner; });
      const auto val_rows = rows_where(assignment, [&](int f) { return f == task.inner; });
      const auto& train = trains[task.fold];
      const auto val = train.select_rows(val_rows);
      const Eigen::VectorXd mu = fit_predict(grid[task.grid], train.select_rows(fit_rows), val, settings);
      outcomes[static_cast<std::size_t>(t)].rmse = rmse(val.target, mu);
      outcomes[static_cast<std::size_t>(t)].ok = true;
    } catch (const NumericError& e) {
      outcomes[static_cast<std::size_t>(t)].failure = e.what();
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
    outcomes[static_cast<std::size_t>(t)].seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return outcomes;
}

Selection choose(const std::vector<HyperParams>& grid, std::span<const TaskOutcome> outcomes) {
  Selection sel;
  sel.scores.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    InnerScore score{grid[g], {}, 0.0, {}};
    double sum = 0.0;
    for (int k = 0; k < kInnerFolds; ++k) {
      const auto& o = outcomes[g * kInnerFolds + static_cast<std::size_t>(k)];
      if (!o.ok) {
        score.failure = o.failure;
        score.rmse.clear();
        break;
      }
      score.rmse.push_back(o.rmse);
      sum += o.rmse;
    }
    score.mean = score.failure.empty() ? sum / kInnerFolds : std::numeric_limits<double>::infinity();
    sel.scores.push_back(std::move(score));
  }
  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& s = sel.scores[g];
    if (!std::isfinite(s.mean)) continue;
    if (!best || s.mean < sel.scores[*best].mean ||
        (s.mean == sel.scores[*best].mean && more_regularized(s.params, sel.scores[*best].params))) {
      best = g;
    }
  }
  if (!best) {
    throw SelectionError("no grid point could be fitted: " +
                         (sel.scores.empty() ? std::string("empty grid") : sel.scores.front().failure));
  }
  sel.index = *best;
  sel.params = grid[*best];
  return sel;
}

std::vector<Task> tasks_for(std::size_t fold, std::size_t grid_size) {
  std::vector<Task> tasks;
  for (std::size_t g = 0; g < grid_size; ++g) {
    for (int k = 0; k < kInnerFolds; ++k) tasks.push_back({fold, g, k});
  }
  return tasks;
}

}  // namespace

std::vector<std::size_t> FoldPlan::test_rows(int fold) const {
  return rows_where(outer, [&](int f) { return f == fold; });
}

std::vector<std::size_t> FoldPlan::train_rows(int fold) const {
  return rows_where(outer, [&](int f) { return f != fold; });
}

std::vector<std::size_t> FoldPlan::inner_train_rows(int fold, int inner_fold) const {
  const auto train = train_rows(fold);
  std::vector<std::size_t> rows;
  for (std::size_t t = 0; t < train.size(); ++t) {
    if (inner.at(static_cast<std::size_t>(fold))[t] != inner_fold) rows.push_back(train[t]);
  }
  return rows;
}

std::vector<std::size_t> FoldPlan::inner_valid_rows(int fold, int inner_fold) const {
  const auto train = train_rows(fold);
  std::vector<std::size_t> rows;
  for (std::size_t t = 0; t < train.size(); ++t) {
    if (inner.at(static_cast<std::size_t>(fold))[t] == inner_fold) rows.push_back(train[t]);
  }
  return rows;
}

std::vector<int> stratified_assignment(std::span<const double> value, std::span<const std::string> ids,
                                       int n_folds, int strat_bins, std::uint64_t seed,
                                       std::uint64_t stream) {
  const std::size_t n = value.size();
  if (ids.size() != n) throw DomainError("stratified_assignment: values and ids differ in length");
  if (n_folds < 1 || strat_bins < 1) throw DomainError("stratified_assignment: folds and bins must be positive");
  if (n < static_cast<std::size_t>(n_folds)) {
    throw DomainError("need at least " + std::to_string(n_folds) + " zones, got " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (value[a] != value[b]) return value[a] < value[b];
    if (ids[a] != ids[b]) return ids[a] < ids[b];
    return a < b;
  });
  const std::size_t bins = std::min(n, static_cast<std::size_t>(strat_bins));
  CounterRng rng(seed, stream);
  std::vector<int> assignment(n, -1);
  std::size_t dealt = 0;
  std::size_t begin = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t end = (b + 1) * n / bins;
    std::span<std::size_t> members(order.data() + begin, end - begin);
    rng.shuffle(members);
    for (std::size_t i : members) assignment[i] = static_cast<int>(dealt++ % static_cast<std::size_t>(n_folds));
    begin = end;
  }
  return assignment;
}

FoldPlan make_fold_plan(std::span<const double> freq, std::span<const std::string> ids, std::uint64_t seed,
                        int strat_bins) {
  FoldPlan plan;
  plan.seed = seed;
  plan.strat_bins = strat_bins;
  plan.outer = stratified_assignment(freq, ids, kOuterFolds, strat_bins, seed, kOuterStream);
  for (int j = 0; j < kOuterFolds; ++j) {
    const auto train = plan.train_rows(j);
    std::vector<double> v;
    std::vector<std::string> id;
    for (std::size_t i : train) {
      v.push_back(freq[i]);
      id.push_back(ids[i]);
    }
    plan.inner.push_back(stratified_assignment(v, id, kInnerFolds, strat_bins, seed,
                                               kInnerStream + static_cast<std::uint64_t>(j)));
  }
  return plan;
}

FoldPlan make_fold_plan(const zones::ZoneTable& zones, std::uint64_t seed, int strat_bins) {
  std::vector<double> freq;
  std::vector<std::string> ids;
  for (const auto& z : zones.zones) {
    freq.push_back(z.freq);
    ids.push_back(z.postcode);
  }
  return make_fold_plan(freq, ids, seed, strat_bins);
}

FoldPlan make_fold_plan(const features::FeatureMatrix& m, std::uint64_t seed, int strat_bins) {
  std::vector<double> freq(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) freq[static_cast<std::size_t>(i)] = m.target(i) / m.exposure(i);
  return make_fold_plan(freq, m.zone_ids, seed, strat_bins);
}

double rmse(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  if (y.size() == 0) throw DomainError("rmse: empty input");
  if (y.size() != yhat.size()) throw DomainError("rmse: inputs differ in length");
  return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

std::string family_label(Family f) {
  switch (f) {
    case Family::Glm: return "glm";
    case Family::Gbt: return "gbt";
    case Family::Mlp: return "mlp";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "glm") return Family::Glm;
  if (name == "gbt") return Family::Gbt;
  if (name == "mlp") return Family::Mlp;
  throw ConfigError("unknown model family '" + name + "' (expected glm, gbt or mlp)");
}

Family family_of(const HyperParams& p) {
  return std::visit(Overloaded{[](const GlmParams&) { return Family::Glm; },
                               [](const GbtParams&) { return Family::Gbt; },
                               [](const MlpParams&) { return Family::Mlp; }},
                    p);
}

std::string label(const HyperParams& p) {
  return std::visit(
      Overloaded{[](const GlmParams& g) { return "eta=" + num(g.eta) + ";alpha=" + num(g.alpha); },
                 [](const GbtParams& g) {
                   return "depth=" + std::to_string(g.max_depth) + ";learning_rate=" + num(g.learning_rate) +
                          ";rounds=" + std::to_string(g.rounds);
                 },
                 [](const MlpParams& g) {
                   std::string h;
                   for (std::size_t i = 0; i < g.hidden.size(); ++i) h += (i ? "x" : "") + std::to_string(g.hidden[i]);
                   return "step=" + num(g.step_size) + ";hidden=" + h;
                 }},
      p);
}

HyperParams parse_hyperparams(Family family, const std::string& text) {
  const auto kv = split_pairs(text);
  switch (family) {
    case Family::Glm: {
      GlmParams g{get_double(kv, "eta", 0.0), get_double(kv, "alpha", 0.0)};
      if (g.eta < 0.0 || g.alpha < 0.0 || g.alpha > 1.0) throw ConfigError("glm: need eta >= 0 and alpha in [0,1]");
      return g;
    }
    case Family::Gbt: {
      GbtParams g{get_int(kv, "depth", 3), get_double(kv, "learning_rate", 0.1), get_int(kv, "rounds", 100)};
      if (g.max_depth < 1 || g.rounds < 0 || !(g.learning_rate > 0.0)) throw ConfigError("gbt: invalid hyperparameters");
      return g;
    }
    case Family::Mlp: {
      MlpParams g;
      g.step_size = get_double(kv, "step", 1e-2);
      if (const auto it = kv.find("hidden"); it != kv.end()) {
        g.hidden.clear();
        std::stringstream ss(it->second);
        std::string part;
        while (std::getline(ss, part, 'x')) {
          const auto v = csv::parse_double(part);
          if (!v || *v < 1 || *v != std::floor(*v)) throw ConfigError("mlp: hidden sizes must be positive integers");
          g.hidden.push_back(static_cast<int>(*v));
        }
      }
      if (!(g.step_size > 0.0)) throw ConfigError("mlp: step must be positive");
      return g;
    }
  }
  throw ConfigError("unknown family");
}

bool more_regularized(const HyperParams& a, const HyperParams& b) {
  if (a.index() != b.index()) throw DomainError("more_regularized: different families");
  if (const auto* x = std::get_if<GlmParams>(&a)) {
    const auto& y = std::get<GlmParams>(b);
    if (x->eta != y.eta) return x->eta > y.eta;
    return x->alpha > y.alpha;
  }
  if (const auto* x = std::get_if<GbtParams>(&a)) {
    const auto& y = std::get<GbtParams>(b);
    if (x->rounds != y.rounds) return x->rounds < y.rounds;
    if (x->max_depth != y.max_depth) return x->max_depth < y.max_depth;
    return x->learning_rate < y.learning_rate;
  }
  const auto& x = std::get<MlpParams>(a);
  const auto& y = std::get<MlpParams>(b);
  if (x.step_size != y.step_size) return x.step_size < y.step_size;
  return std::accumulate(x.hidden.begin(), x.hidden.end(), 0) < std::accumulate(y.hidden.begin(), y.hidden.end(), 0);
}

std::vector<HyperParams> default_grid(Family family) {
  std::vector<HyperParams> grid;
  switch (family) {
    case Family::Glm:
      for (double eta : {0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0}) {
        for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) grid.emplace_back(GlmParams{eta, alpha});
      }
      break;
    case Family::Gbt:
      for (int depth : {2, 3, 4}) {
        for (double nu : {0.05, 0.1, 0.3}) {
          for (int rounds : {50, 100, 200}) grid.emplace_back(GbtParams{depth, nu, rounds});
        }
      }
      break;
    case Family::Mlp:
      for (double step : {1e-2, 1e-3}) {
        for (const auto& hidden : {std::vector<int>{32, 16}, std::vector<int>{64, 32}}) {
          grid.emplace_back(MlpParams{step, hidden});
        }
      }
      break;
  }
  return grid;
}

models::Model fit_with(const HyperParams& p, const features::FeatureMatrix& train, const FitSettings& settings) {
  return std::visit(
      Overloaded{[&](const GlmParams& g) -> models::Model {
                   if (g.eta == 0.0) return models::fit_glm_poisson(train, settings.irls);
                   return models::fit_glm_elasticnet(train, g.eta, g.alpha, settings.enet);
                 },
                 [&](const GbtParams& g) -> models::Model {
                   auto cfg = settings.gbt;
                   cfg.max_depth = g.max_depth;
                   cfg.learning_rate = g.learning_rate;
                   cfg.rounds = g.rounds;
                   return models::fit_gbt_poisson(train, cfg);
                 },
                 [&](const MlpParams& g) -> models::Model {
                   auto cfg = settings.mlp;
                   cfg.step_size = g.step_size;
                   cfg.hidden = g.hidden;
                   return models::fit_mlp_poisson(train, cfg);
                 }},
      p);
}

Eigen::VectorXd fit_predict(const HyperParams& p, const features::FeatureMatrix& train,
                            const features::FeatureMatrix& test, const FitSettings& settings) {
  auto [ztrain, params] = features::standardize_fit(train);
  const auto ztest = features::standardize_apply(test, params);
  return models::predict(fit_with(p, ztrain, settings), ztest);
}

Selection inner_select(const features::FeatureMatrix& train, std::span<const int> inner,
                       const std::vector<HyperParams>& grid, const FitSettings& settings, int jobs) {
  if (grid.empty()) throw SelectionError("empty hyperparameter grid");
  if (inner.size() != static_cast<std::size_t>(train.rows())) throw DomainError("inner_select: plan and rows differ");
  if (grid.size() == 1) {
    Selection sel;
    sel.params = grid.front();
    sel.scores.push_back({grid.front(), {}, 0.0, {}});
    return sel;
  }
  const std::vector<features::FeatureMatrix> trains{train};
  const std::vector<std::vector<int>> assignment{std::vector<int>(inner.begin(), inner.end())};
  const auto tasks = tasks_for(0, grid.size());
  const auto outcomes = run_tasks(trains, assignment, tasks, grid, settings, jobs);
  return choose(grid, outcomes);
}

std::vector<double> CvResult::rmses() const {
  std::vector<double> v;
  for (const auto& f : folds) v.push_back(f.rmse);
  return v;
}

std::pair<double, double> mean_sd(std::span<const double> v) {
  if (v.empty()) throw DomainError("mean_sd: empty input");
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

CvResult run_experiment(const features::FeatureMatrix& m, const ExperimentOptions& options) {
  return run_experiment(m, make_fold_plan(m, options.seed, options.strat_bins), options);
}

CvResult run_experiment(const features::FeatureMatrix& m, const FoldPlan& plan, const ExperimentOptions& options) {
  m.validate();
  if (plan.zones() != static_cast<std::size_t>(m.rows())) throw DomainError("fold plan does not match the data");
  const auto grid = options.grid.empty() ? default_grid(options.family) : options.grid;
  for (const auto& p : grid) {
    if (family_of(p) != options.family) throw ConfigError("grid point " + label(p) + " is not of family " + family_label(options.family));
  }

  std::vector<features::FeatureMatrix> trains;
  for (int j = 0; j < kOuterFolds; ++j) trains.push_back(m.select_rows(plan.train_rows(j)));

  std::vector<Task> tasks;
  if (grid.size() > 1) {
    for (std::size_t j = 0; j < kOuterFolds; ++j) {
      const auto t = tasks_for(j, grid.size());
      tasks.insert(tasks.end(), t.begin(), t.end());
    }
  }
  const auto outcomes = run_tasks(trains, plan.inner, tasks, grid, options.settings, options.jobs);

  CvResult result;
  result.family = options.family;
  result.features = options.features_label;
  result.seed = plan.seed;
  result.nll_includes_lgamma = options.settings.include_lgamma;
  result.folds.resize(kOuterFolds);
  const std::size_t per_fold = grid.size() > 1 ? grid.size() * kInnerFolds : 0;
  for (std::size_t j = 0; j < kOuterFolds; ++j) {
    auto& f = result.folds[j];
    f.fold = static_cast<int>(j);
    try {
      f.params = grid.size() > 1
                     ? choose(grid, std::span(outcomes).subspan(j * per_fold, per_fold)).params
                     : grid.front();
    } catch (const SelectionError& e) {
      throw SelectionError("fold " + std::to_string(j + 1) + ": " + e.what());
    }
    for (std::size_t t = 0; t < per_fold; ++t) f.runtime_seconds += outcomes[j * per_fold + t].seconds;
  }

  std::vector<std::exception_ptr> errors(kOuterFolds);
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(options.jobs)) if (options.jobs != 1)
  for (int j = 0; j < kOuterFolds; ++j) {
    auto& f = result.folds[static_cast<std::size_t>(j)];
    const auto start = std::chrono::steady_clock::now();
    try {
      f.test_rows = plan.test_rows(j);
      const auto test = m.select_rows(f.test_rows);
      auto [ztrain, params] = features::standardize_fit(trains[static_cast<std::size_t>(j)]);
      const auto model = fit_with(f.params, ztrain, options.settings);
      const Eigen::VectorXd mu = models::predict(model, features::standardize_apply(test, params));
      f.rmse = rmse(test.target, mu);
      f.test_nll = models::poisson_nll(test.target, mu, options.settings.include_lgamma).value;
      f.model_report = models::report(model);
      f.standardization = std::move(params);
    } catch (const NumericError& e) {
      try {
        throw NumericError("fold " + std::to_string(j + 1) + ": " + e.what());
      } catch (...) {
        errors[static_cast<std::size_t>(j)] = std::current_exception();
      }
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
    f.runtime_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  const auto v = result.rmses();
  std::tie(result.mean, result.sd) = mean_sd(v);
  return result;
}

RobustnessReport robustness_suite(const features::FeatureMatrix& m, const ExperimentOptions& options,
                                  std::span<const std::uint64_t> seeds) {
  if (seeds.size() < 2) throw DomainError("robustness_suite: need at least two seeds");
  RobustnessReport report;
  for (std::uint64_t seed : seeds) {
    auto o = options;
    o.seed = seed;
    try {
      report.runs.push_back(run_experiment(m, o));
    } catch (const NumericError& e) {
      throw NumericError("seed " + std::to_string(seed) + ": " + e.what());
    }
  }
  std::vector<double> means;
  std::vector<double> sds;
  for (const auto& r : report.runs) {
    means.push_back(r.mean);
    sds.push_back(r.sd);
  }
  report.avg_mean = mean_sd(means).first;
  report.avg_sd = mean_sd(sds).first;
  return report;
}

void write_cv_result(std::ostream& out, const CvResult& r, char delimiter, bool header) {
  csv::Writer w(out, delimiter);
  if (header) w.row({"family", "features", "seed", "fold", "hyperparameters", "rmse",
         r.nll_includes_lgamma ? "test_nll_full" : "test_nll"});
  const std::string fam = family_label(r.family);
  const std::string seed = std::to_string(r.seed);
  for (const auto& f : r.folds) {
    w.row({fam, r.features, seed, std::to_string(f.fold + 1), label(f.params), num(f.rmse), num(f.test_nll)});
  }
  w.row({fam, r.features, seed, "Mean", "", num(r.mean), ""});
  w.row({fam, r.features, seed, "std", "", num(r.sd), ""});
}

namespace {

std::string fixed4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

void write_aligned(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) line += "  ";
      line += c < 2 ? r[c] + std::string(width[c] - r[c].size(), ' ')
                    : std::string(width[c] - r[c].size(), ' ') + r[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
}

}  // namespace

void write_cv_table(std::ostream& out, std::span<const CvResult> results) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"Model", "Features"};
  for (int j = 1; j <= kOuterFolds; ++j) head.push_back(std::to_string(j));
  head.push_back("Mean");
  head.push_back("std");
  rows.push_back(head);
  for (const auto& r : results) {
    std::vector<std::string> row{family_label(r.family), r.features};
    for (const auto& f : r.folds) row.push_back(fixed4(f.rmse));
    row.push_back(fixed4(r.mean));
    row.push_back(fixed4(r.sd));
    rows.push_back(std::move(row));
  }
  write_aligned(out, rows);
}

void write_robustness(std::ostream& out, const RobustnessReport& r, char delimiter) {
  csv::Writer w(out, delimiter);
  std::vector<std::string> head{"family", "features", "seed"};
  for (int j = 1; j <= kOuterFolds; ++j) head.push_back("fold_" + std::to_string(j));
  head.push_back("Mean");
  head.push_back("std");
  w.row(head);
  std::string fam;
  std::string feats;
  for (const auto& run : r.runs) {
    fam = family_label(run.family);
    feats = run.features;
    std::vector<std::string> row{fam, feats, std::to_string(run.seed)};
    for (const auto& f : run.folds) row.push_back(num(f.rmse));
    row.push_back(num(run.mean));
    row.push_back(num(run.sd));
    w.row(row);
  }
  std::vector<std::string> avg{fam, feats, "average"};
  for (int j = 0; j < kOuterFolds; ++j) avg.emplace_back();
  avg.push_back(num(r.avg_mean));
  avg.push_back(num(r.avg_sd));
  w.row(avg);
}

void write_robustness_table(std::ostream& out, const RobustnessReport& r) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Model", "Features", "Seed", "Mean", "std"});
  for (const auto& run : r.runs) {
    rows.push_back({family_label(run.family), run.features, std::to_string(run.seed), fixed4(run.mean), fixed4(run.sd)});
  }
  const std::string fam = r.runs.empty() ? "" : family_label(r.runs.front().family);
  const std::string feats = r.runs.empty() ? "" : r.runs.front().features;
  rows.push_back({fam, feats, "avg", fixed4(r.avg_mean), fixed4(r.avg_sd)});
  write_aligned(out, rows);
}

void write_fold_reports(std::ostream& out, const CvResult& r) {
  for (const auto& f : r.folds) {
    out << "[fold " << f.fold + 1 << "]\n"
        << "selected: " << label(f.params) << '\n'
        << f.model_report << '\n';
  }
}

}  // namespace geofreq::eval
