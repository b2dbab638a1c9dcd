#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "geofreq/error.hpp"
#include "geofreq/zones.hpp"
#include "support.hpp"

using namespace geofreq;
using namespace geofreq::zones;

namespace {

double summary(const ZoneTable& t, const ZoneAggregate& z, const std::string& name) {
  const auto c = t.column(name);
  REQUIRE(c.has_value());
  return z.summaries[*c];
}

double two_pass_sd(const std::vector<double>& v) {
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

double naive_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("region code is the two-digit prefix") {
  CHECK(derive_region_code("1140") == "11");
  CHECK(derive_region_code("2000") == "20");
  CHECK(derive_region_code("9000") == "90");
  CHECK_THROWS_AS(derive_region_code("B100"), FormatError);
  CHECK_THROWS_AS(derive_region_code("1"), FormatError);
}

TEST_CASE("single policy zone") {
  const auto t = aggregate_zones({testing::policy("1000", 0.5, 1)});
  REQUIRE(t.zones.size() == 1);
  const auto& z = t.zones[0];
  CHECK(z.expo_ag == 0.5);
  CHECK(z.nclaims_ag == 1);
  CHECK(z.freq == 2.0);
  CHECK(z.n_policies == 1);
  for (std::size_t c = 0; c < t.summary_columns.size(); ++c) {
    if (t.summary_columns[c].ends_with("_sd")) CHECK(z.summaries[c] == 0.0);
  }
}

TEST_CASE("three policies with ageph 20, 30, 40") {
  const auto t = aggregate_zones({testing::policy("1000", 1, 0, 20), testing::policy("1000", 1, 0, 30),
                                  testing::policy("1000", 1, 0, 40)});
  const auto& z = t.zones[0];
  CHECK(summary(t, z, "ageph_mean") == doctest::Approx(30).epsilon(1e-15));
  CHECK(summary(t, z, "ageph_median") == 30);
  CHECK(summary(t, z, "ageph_sd") == doctest::Approx(two_pass_sd({20, 30, 40})).epsilon(1e-14));
}

TEST_CASE("even count median is the midpoint") {
  const auto t = aggregate_zones({testing::policy("1000", 1, 0, 20), testing::policy("1000", 1, 0, 30),
                                  testing::policy("1000", 1, 0, 41), testing::policy("1000", 1, 0, 60)});
  CHECK(summary(t, t.zones[0], "ageph_median") == 35.5);
}

TEST_CASE("centroid disagreement is a data error") {
  auto a = testing::policy("1000", 1, 0);
  auto b = testing::policy("1000", 1, 0);
  b.lat += 1e-6;
  CHECK_THROWS_AS(aggregate_zones({a, b}), DataError);
  b.lat = a.lat + 1e-12;
  CHECK_NOTHROW(aggregate_zones({a, b}));
}

TEST_CASE("column order: numeric summaries then shares, each alphabetical") {
  const auto names = summary_column_names();
  const auto first_prop = std::find_if(names.begin(), names.end(), [](const auto& n) { return n.ends_with("_prop"); });
  CHECK(std::is_sorted(names.begin(), first_prop));
  CHECK(std::is_sorted(first_prop, names.end()));
  CHECK(std::all_of(first_prop, names.end(), [](const auto& n) { return n.ends_with("_prop"); }));
}

TEST_CASE("random tables match a naive group-by") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    CounterRng rng(seed, 3);
    ingest::PolicyTable table;
    const auto n = 1 + rng.below(50);
    for (std::size_t i = 0; i < n; ++i) {
      const auto zone = rng.below(10);
      auto p = testing::policy(std::to_string(1000 + 37 * zone), rng.uniform_open(), static_cast<int>(rng.below(4)),
                               std::round(rng.uniform(18, 90)));
      p.lat = 50.0 + 0.01 * static_cast<double>(zone);
      p.bm = static_cast<int>(rng.below(23));
      p.power = std::round(rng.uniform(20, 200));
      p.agec = std::round(rng.uniform(0, 30));
      p.coverage = static_cast<ingest::Coverage>(rng.below(3));
      p.sex = rng.below(2) ? ingest::Sex::Male : ingest::Sex::Female;
      p.fuel = rng.below(2) ? ingest::Fuel::Diesel : ingest::Fuel::Gasoline;
      p.use = rng.below(5) ? ingest::Use::Private : ingest::Use::Work;
      p.fleet = rng.below(4) == 0;
      table.push_back(p);
    }
    const auto t = aggregate_zones(table);

    std::map<std::string, std::vector<ingest::PolicyRecord>> groups;
    for (const auto& p : table) groups[p.postcode].push_back(p);
    REQUIRE(t.zones.size() == groups.size());
    double expo_total = 0;
    long long claims_total = 0;
    for (const auto& p : table) {
      expo_total += p.exposure;
      claims_total += p.nclaims;
    }
    double expo_zones = 0;
    long long claims_zones = 0;
    for (const auto& z : t.zones) {
      const auto& g = groups.at(z.postcode);
      double e = 0;
      long long c = 0;
      for (const auto& p : g) {
        e += p.exposure;
        c += p.nclaims;
      }
      CHECK(close(z.expo_ag, e, 1e-12));
      CHECK(z.nclaims_ag == c);
      CHECK(z.n_policies == g.size());
      CHECK(z.freq == static_cast<double>(z.nclaims_ag) / z.expo_ag);
      for (const auto& var : ingest::numeric_vars()) {
        std::vector<double> v;
        for (const auto& p : g) v.push_back(var.value(p));
        double mean = 0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        const std::string name(var.name);
        CHECK(close(summary(t, z, name + "_mean"), mean, 1e-12));
        CHECK(close(summary(t, z, name + "_median"), naive_median(v), 1e-12));
        CHECK(close(summary(t, z, name + "_sd"), two_pass_sd(v), 1e-12));
      }
      for (const auto& var : ingest::categorical_vars()) {
        double share_sum = 0;
        for (std::size_t l = 0; l < var.levels.size(); ++l) {
          std::size_t count = 0;
          for (const auto& p : g) count += var.level(p) == l;
          const double share = summary(t, z, std::string(var.name) + "_" + std::string(var.levels[l]) + "_prop");
          CHECK(share == doctest::Approx(static_cast<double>(count) / static_cast<double>(g.size())).epsilon(1e-15));
          CHECK(share >= 0.0);
          CHECK(share <= 1.0);
          share_sum += share;
        }
        CHECK(std::abs(share_sum - 1.0) <= 1e-9);
      }
      expo_zones += z.expo_ag;
      claims_zones += z.nclaims_ag;
    }
    CHECK(close(expo_zones, expo_total, 1e-9));
    CHECK(claims_zones == claims_total);
    CHECK(std::is_sorted(t.zones.begin(), t.zones.end(),
                         [](const auto& a, const auto& b) { return a.postcode < b.postcode; }));
  }
}

TEST_CASE("zone table write and read round-trips") {
  ingest::PolicyTable table;
  for (int i = 0; i < 40; ++i) table.push_back(testing::policy(std::to_string(1000 + i % 7), 0.1 + 0.02 * i, i % 3, 20 + i));
  const auto t = aggregate_zones(table);
  std::stringstream s;
  write_zone_table(s, t);
  const auto back = read_zone_table(s);
  CHECK(back == t);
}
