#include <doctest.h>

#include <cmath>

#include "geofreq/error.hpp"
#include "geofreq/models/glm.hpp"
#include "geofreq/synth.hpp"
#include "geofreq/zones.hpp"

using namespace geofreq;
using namespace geofreq::synth;

TEST_CASE("Poisson sampler moments") {
  for (double rate : {0.1, 1.0, 10.0, 1200.0}) {
    CounterRng rng(17, static_cast<std::uint64_t>(rate * 10));
    const int n = 100000;
    double s = 0, ss = 0;
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<double>(poisson(rng, rate));
      CHECK(k >= 0.0);
      s += k;
      ss += k * k;
    }
    const double mean = s / n;
    const double var = ss / n - mean * mean;
    CHECK(std::abs(mean - rate) <= 4.0 * std::sqrt(rate / n));
    // Var of the sample variance is about (rate + 2 rate^2) / n.
    CHECK(std::abs(var - rate) <= 4.0 * std::sqrt((rate + 2 * rate * rate) / n));
  }
  CounterRng rng(1, 1);
  CHECK(poisson(rng, 0.0) == 0);
  CHECK_THROWS_AS(poisson(rng, -1.0), DomainError);
}

TEST_CASE("null model frequency") {
  SynthConfig cfg;
  cfg.seed = 3;
  const auto d = generate_zones(cfg);
  CHECK(d.matrix.rows() == 583);
  CHECK(d.zones.zones.size() == 583);
  const double e = d.matrix.exposure.sum();
  const double freq = d.matrix.target.sum() / e;
  CHECK(std::abs(freq - 0.13) <= 3.0 * std::sqrt(0.13 / e));
  for (const auto& z : d.zones.zones) {
    CHECK(z.expo_ag >= 50.0);
    CHECK(z.expo_ag <= 500.0);
    CHECK(z.lat >= 50.5);
    CHECK(z.lat <= 51.0);
    CHECK(z.lon >= 3.5);
    CHECK(z.lon <= 5.5);
  }
}

TEST_CASE("planted coefficients are recovered") {
  SynthConfig cfg;
  cfg.beta = Eigen::Vector3d(std::log(0.13), 0.3, -0.2);
  cfg.seed = 8;
  const auto d = generate_zones(cfg);
  CHECK(d.matrix.columns == std::vector<std::string>{"x01", "x02"});
  const auto fit = models::fit_glm_poisson(d.matrix);
  // About 160k expected claims: standard errors are below 0.003.
  CHECK(std::abs(fit.intercept - cfg.beta(0)) < 0.015);
  CHECK(std::abs(fit.coefficients(0) - 0.3) < 0.015);
  CHECK(std::abs(fit.coefficients(1) + 0.2) < 0.015);
}

TEST_CASE("generation is deterministic and order free") {
  SynthConfig cfg;
  cfg.beta = Eigen::Vector2d(std::log(0.13), 0.2);
  cfg.seed = 5;
  const auto a = generate_zones(cfg);
  const auto b = generate_zones(cfg);
  CHECK(a.zones == b.zones);
  CHECK(a.matrix.target == b.matrix.target);
  auto smaller = cfg;
  smaller.n_zones = 100;
  const auto c = generate_zones(smaller);
  for (std::size_t i = 0; i < 100; ++i) CHECK(c.zones.zones[i] == a.zones.zones[i]);
  auto other = cfg;
  other.seed = 6;
  CHECK(generate_zones(other).matrix.target != a.matrix.target);
}

TEST_CASE("policies aggregate back to the zones") {
  SynthConfig cfg;
  cfg.n_zones = 40;
  cfg.seed = 2;
  const auto d = generate_zones(cfg);
  const auto policies = generate_policies(d, 2);
  for (const auto& p : policies) CHECK_FALSE(ingest::check_invariants(p).has_value());
  const auto z = zones::aggregate_zones(policies);
  REQUIRE(z.zones.size() == 40);
  for (std::size_t i = 0; i < 40; ++i) {
    const auto& orig = d.zones.zones[i];
    const auto* back = z.find(orig.postcode);
    REQUIRE(back != nullptr);
    CHECK(back->expo_ag == doctest::Approx(orig.expo_ag).epsilon(1e-12));
    CHECK(back->nclaims_ag == orig.nclaims_ag);
    CHECK(back->n_policies == static_cast<std::size_t>(std::ceil(orig.expo_ag)));
    CHECK(back->lat == orig.lat);
  }
}

TEST_CASE("configuration checks") {
  SynthConfig cfg;
  cfg.n_zones = 5;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.n_zones = 10;
  cfg.exposure_min = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.exposure_min = 10;
  cfg.exposure_max = 5;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.exposure_max = 20;
  cfg.beta.resize(0);
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("random land cover honours the artificial share") {
  const Box box{0, 0, 10000, 10000};
  const auto g = random_landcover(box, 100, 0.3, 4);
  std::size_t artificial = 0, total = 0;
  for (double x = 50; x < 10000; x += 100) {
    for (double y = 50; y < 10000; y += 100) {
      const auto code = g.code_at({x, y});
      REQUIRE(code.has_value());
      CHECK((*code == 111 || *code == 211));
      artificial += *code == 111;
      ++total;
    }
  }
  CHECK(std::abs(static_cast<double>(artificial) / total - 0.3) < 4 * std::sqrt(0.21 / total));
}
