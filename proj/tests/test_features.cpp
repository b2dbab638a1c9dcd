#include <doctest.h>

#include <cmath>
#include <sstream>

#include "geofreq/error.hpp"
#include "geofreq/features.hpp"
#include "geofreq/geo/layers.hpp"
#include "geofreq/ingest.hpp"
#include "support.hpp"

using namespace geofreq;
using namespace geofreq::features;

namespace {

zones::ZoneTable small_zones() {
  ingest::PolicyTable t;
  const char* pcs[] = {"1000", "1050", "2000", "2060", "3000", "9000"};
  int k = 0;
  for (const char* pc : pcs) {
    for (int i = 0; i < 3; ++i) {
      auto r = testing::policy(pc, 0.5 + 0.1 * i, i % 2, 30.0 + k + 3 * i);
      r.lat = 50.5 + 0.05 * k;
      r.lon = 4.0 + 0.1 * k;
      r.sex = (i + k) % 2 ? ingest::Sex::Female : ingest::Sex::Male;
      t.push_back(r);
    }
    ++k;
  }
  return zones::aggregate_zones(t);
}

BlockSources env_sources(const zones::ZoneTable& z) {
  BlockSources s;
  for (double r : geo::kBufferRadiiKm) {
    EnvTable t;
    t.radius_km = r;
    double v = 0;
    for (const auto& zone : z.zones) {
      std::array<double, geo::EnvFeatureVector::kFields> row{};
      for (auto& x : row) x = (v += 0.25) * r;
      t.rows[zone.postcode] = row;
    }
    s.env[r] = t;
  }
  return s;
}

}  // namespace

TEST_CASE("block column counts") {
  const auto z = small_zones();
  const auto src = env_sources(z);
  const auto base = assemble(z, {"base"}, src);
  const auto n_base = z.summary_columns.size() - ingest::categorical_vars().size();
  CHECK(static_cast<std::size_t>(base.cols()) == n_base);
  CHECK(assemble(z, {"base", "lat_long", "osm_r5"}, src).cols() == base.cols() + 2 + 13);
  CHECK(assemble(z, {"osm_rALL"}, src).cols() == 52);
  CHECK(assemble(z, {"lat_long"}, src).columns == std::vector<std::string>{"lat", "long"});
  const auto osm = assemble(z, {"osm_r0.5"}, src);
  CHECK(osm.columns.front() == "road_len_km_per_km2_r0.5");
  CHECK(osm.values(1, 0) == 0.25 * 14 * 0.5);
  CHECK(base.rows() == 6);
  CHECK(base.exposure(0) == doctest::Approx(1.8));
  CHECK(base.target(0) == 1.0);
  for (const auto& c : base.columns) CHECK(c != "freq");
}

TEST_CASE("one share column per categorical is dropped") {
  const auto z = small_zones();
  const auto m = assemble(z, {"base"});
  for (const auto& var : ingest::categorical_vars()) {
    std::size_t present = 0;
    for (const auto& level : var.levels) {
      const auto name = std::string(var.name) + "_" + std::string(level) + "_prop";
      present += std::count(m.columns.begin(), m.columns.end(), name);
    }
    CHECK(present == var.levels.size() - 1);
  }
}

TEST_CASE("postcode_2 is drop-first one-hot") {
  const auto z = small_zones();
  const auto m = assemble(z, {"postcode_2"});
  CHECK(m.columns == std::vector<std::string>{"postcode_2_20", "postcode_2_30", "postcode_2_90"});
  CHECK(m.values.row(0).sum() == 0.0);
  CHECK(m.values.row(1).sum() == 0.0);
  CHECK(m.values(2, 0) == 1.0);
  CHECK(m.values(3, 0) == 1.0);
  CHECK(m.values(5, 2) == 1.0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) CHECK(m.values.row(i).sum() <= 1.0);
}

TEST_CASE("unknown or missing blocks are configuration errors") {
  const auto z = small_zones();
  CHECK_THROWS_AS(assemble(z, {"osm_r2"}), ConfigError);
  CHECK_THROWS_AS(assemble(z, {"osm_r5"}), ConfigError);
  CHECK_THROWS_AS(assemble(z, {"embeddings"}), ConfigError);
  CHECK_THROWS_AS(assemble(z, {"emb:pca"}), ConfigError);
  CHECK_THROWS_AS(assemble(z, {"freq"}), ConfigError);
  auto src = env_sources(z);
  src.env[5.0].rows.erase("3000");
  CHECK_THROWS_AS(assemble(z, {"osm_r5"}, src), DataError);
  CHECK(spec_label({"base", "lat_long", "osm_r5"}) == "base + lat_long + osm_r5");
  CHECK(is_block_name("emb:pca"));
  CHECK_FALSE(is_block_name("emb:"));
}

TEST_CASE("standardization") {
  FeatureMatrix m;
  m.zone_ids = {"a", "b", "c"};
  m.columns = {"x", "k"};
  m.values.resize(3, 2);
  m.values << 1, 7, 2, 7, 3, 7;
  m.exposure = Eigen::VectorXd::Ones(3);
  m.target = Eigen::VectorXd::Zero(3);
  const auto [s, p] = standardize_fit(m);
  CHECK(s.values(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-14));
  CHECK(s.values(1, 0) == 0.0);
  CHECK(s.values(2, 0) == doctest::Approx(1.224744871391589).epsilon(1e-14));
  CHECK(p.constant == std::vector<bool>{false, true});
  CHECK(s.values.col(1) == m.values.col(1));
  CHECK(unstandardize(s, p).values.isApprox(m.values, 1e-15));

  const auto r = testing::random_matrix(200, 6, 3, 1, 5);
  const auto [rs, rp] = standardize_fit(r);
  for (Eigen::Index j = 0; j < rs.cols(); ++j) {
    const double mean = rs.values.col(j).mean();
    const double var = (rs.values.col(j).array() - mean).square().mean();
    CHECK(std::abs(mean) < 1e-12);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(unstandardize(rs, rp).values.isApprox(r.values, 1e-13));

  auto other = m;
  other.columns = {"x", "z"};
  CHECK_THROWS_AS(standardize_apply(other, p), DataError);
}

TEST_CASE("test rows use training statistics") {
  const auto r = testing::random_matrix(100, 3, 8);
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < 100; ++i) (i % 4 ? train : test).push_back(i);
  const auto p = fit_standardization(r.select_rows(train));
  const auto t = standardize_apply(r.select_rows(test), p);
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      CHECK(t.values(i, j) == doctest::Approx((r.values(static_cast<Eigen::Index>(test[i]), j) - p.mean(j)) / p.sd(j)));
    }
  }
}

TEST_CASE("env tables round-trip") {
  std::vector<std::string> ids{"1000", "1050"};
  geo::LayerSet set;
  geo::ensure_required_layers(set);
  set["retail"].points.push_back({150000, 170000});
  const geo::IndexedLayers layers(set);
  std::vector<geo::EnvFeatureVector> v{geo::env_features(geo::ProjectedPoint{150000, 170000}, 3.0, layers),
                                       geo::env_features(geo::ProjectedPoint{0, 0}, 3.0, layers)};
  std::ostringstream out;
  write_env_table(out, ids, v, 3.0);
  std::istringstream in(out.str());
  const auto t = read_env_table(in);
  CHECK(t.radius_km == 3.0);
  CHECK(t.rows.size() == 2);
  CHECK(t.rows.at("1050")[0] == 0.0);
  CHECK(t.rows.at("1000")[4] == doctest::Approx(1.0 / (9.0 * 3.141592653589793)).epsilon(1e-12));
}

TEST_CASE("embeddings") {
  std::istringstream ok("postcode,e0,e1\n1000,0.5,1.5\n1050,2,3\n");
  const auto e = load_embeddings(ok, 2, "vae");
  CHECK(e.vectors.at("1050") == std::vector<double>{2, 3});
  std::istringstream wrong_dim("1000,0.5,1.5,2\n");
  CHECK_THROWS_AS(load_embeddings(wrong_dim, 2, "vae"), FormatError);
  std::istringstream dup("1000,1,2\n1000,3,4\n");
  CHECK_THROWS_AS(load_embeddings(dup, 2, "vae"), DataError);

  const auto z = small_zones();
  BlockSources src;
  EmbeddingBlock full{"vae", 2, {}};
  for (const auto& zone : z.zones) full.vectors[zone.postcode] = {1.0, 2.0};
  src.embeddings["vae"] = full;
  const auto m = assemble(z, {"emb:vae"}, src);
  CHECK(m.columns == std::vector<std::string>{"vae_emb_0", "vae_emb_1"});
  src.embeddings["vae"].vectors.erase("9000");
  CHECK_THROWS_AS(assemble(z, {"embeddings"}, src), DataError);
}

TEST_CASE("matrix validation") {
  auto m = testing::random_matrix(5, 2, 1);
  m.target.setZero();
  CHECK_NOTHROW(m.validate());
  auto bad = m;
  bad.values(2, 1) = std::nan("");
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = m;
  bad.exposure(0) = 0.0;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = m;
  bad.columns = {"c0", "c0"};
  CHECK_THROWS_AS(bad.validate(), DataError);
  CHECK(m.offset()(3) == doctest::Approx(std::log(m.exposure(3))).epsilon(1e-15));
}
