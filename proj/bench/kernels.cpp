// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <numeric>

#include "geofreq/geo/buffer.hpp"
#include "geofreq/models/gbt.hpp"
#include "geofreq/models/glm.hpp"
#include "geofreq/synth.hpp"

using namespace geofreq;

namespace {

const synth::Box kBox{120000, 140000, 180000, 200000};

struct EnvFixture {
  geo::IndexedLayers layers;
  std::vector<geo::ProjectedPoint> centers;
};

const EnvFixture& env_fixture() {
  static const EnvFixture f = [] {
    CounterRng rng(1, 1);
    std::vector<geo::ProjectedPoint> centers(583);
    for (auto& c : centers) c = {rng.uniform(kBox.xmin, kBox.xmax), rng.uniform(kBox.ymin, kBox.ymax)};
    return EnvFixture{geo::IndexedLayers(synth::random_layer_set(kBox, 3000, 4000, 1)), std::move(centers)};
  }();
  return f;
}

struct SplitFixture {
  Eigen::MatrixXd x;
  Eigen::VectorXd grad, hess;
  std::vector<std::size_t> rows;
};

const SplitFixture& split_fixture() {
  static const SplitFixture f = [] {
    const int n = 20000, p = 64;
    CounterRng rng(2, 2);
    SplitFixture s{Eigen::MatrixXd(n, p), Eigen::VectorXd(n), Eigen::VectorXd(n), std::vector<std::size_t>(n)};
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) s.x(i, j) = rng.normal();
      s.hess(i) = rng.uniform(0.5, 5.0);
      s.grad(i) = s.hess(i) - static_cast<double>(synth::poisson(rng, s.hess(i)));
    }
    std::iota(s.rows.begin(), s.rows.end(), std::size_t{0});
    return s;
  }();
  return f;
}

void BM_EnvTableSerial(benchmark::State& state) {
  const auto& f = env_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(geo::reference::env_feature_table(f.centers, 5.0, f.layers));
}

void BM_EnvTableParallel(benchmark::State& state) {
  const auto& f = env_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(geo::env_feature_table(f.centers, 5.0, f.layers));
}

void BM_BestSplitSerial(benchmark::State& state) {
  const auto& f = split_fixture();
  const models::GbtConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(models::reference::best_split(f.x, f.rows, f.grad, f.hess, cfg));
}

void BM_BestSplitParallel(benchmark::State& state) {
  const auto& f = split_fixture();
  const models::GbtConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(models::best_split(f.x, f.rows, f.grad, f.hess, cfg));
}

void BM_WeightedGramSerial(benchmark::State& state) {
  const auto& f = split_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(models::reference::weighted_gram(f.x, f.hess));
}

void BM_WeightedGramParallel(benchmark::State& state) {
  const auto& f = split_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(models::weighted_gram(f.x, f.hess));
}

}  // namespace

BENCHMARK(BM_EnvTableSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnvTableParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BestSplitSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BestSplitParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_WeightedGramSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WeightedGramParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
