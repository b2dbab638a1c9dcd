#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "geofreq/error.hpp"
#include "geofreq/geo/buffer.hpp"
#include "geofreq/geo/landcover.hpp"
#include "geofreq/geo/layers.hpp"
#include "geofreq/geo/spatial_index.hpp"
#include "geofreq/synth.hpp"

using namespace geofreq;
using namespace geofreq::geo;

namespace {

FeatureLayer points(const std::string& tag, std::vector<ProjectedPoint> pts) {
  return {LayerKind::Point, tag, std::move(pts), {}};
}

FeatureLayer roads(std::vector<Polyline> lines) { return {LayerKind::Polyline, "road", {}, std::move(lines)}; }

LayerSet empty_layers() {
  LayerSet s;
  ensure_required_layers(s);
  return s;
}

double layer_length(const FeatureLayer& l) {
  double m = 0;
  for (const auto& line : l.polylines) {
    for (std::size_t i = 1; i < line.size(); ++i) m += std::hypot(line[i].x - line[i - 1].x, line[i].y - line[i - 1].y);
  }
  return m;
}

const synth::Box kBox{140000, 160000, 160000, 180000};

}  // namespace

TEST_CASE("point counts are boundary inclusive") {
  const auto layer = points("retail", {{5000, 0}, {0, 5000}, {5000.000001, 0}, {0, 0}});
  CHECK(count_points_in_buffer(layer, {0, 0}, 5000) == 3);
  CHECK(count_points_in_buffer(SpatialIndex(layer), {0, 0}, 5000) == 3);
  CHECK(count_points_in_buffer(points("retail", {}), {0, 0}, 5000) == 0);
  CHECK_THROWS_AS(count_points_in_buffer(layer, {0, 0}, 0.0), DomainError);
}

TEST_CASE("point counts match brute force on random fixtures") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    CounterRng rng(seed, 1);
    const auto layer = synth::random_points("retail", 5000, kBox, rng);
    const SpatialIndex index(layer);
    const ProjectedPoint c{rng.uniform(kBox.xmin, kBox.xmax), rng.uniform(kBox.ymin, kBox.ymax)};
    const double r = rng.uniform(100, 5000);
    const auto expected = synth::oracle_count_in_disc(layer.points, c, r);
    CHECK(count_points_in_buffer(layer, c, r) == expected);
    CHECK(count_points_in_buffer(index, c, r) == expected);
  }
}

TEST_CASE("index candidates are a superset of disc members") {
  CounterRng rng(77, 2);
  const auto layer = synth::random_points("retail", 10000, kBox, rng);
  const SpatialIndex index(layer);
  for (int q = 0; q < 100; ++q) {
    const ProjectedPoint c{rng.uniform(kBox.xmin, kBox.xmax), rng.uniform(kBox.ymin, kBox.ymax)};
    const double r = rng.uniform(50, 3000);
    const auto cand = index.candidates(c, r);
    std::size_t members = 0;
    for (std::size_t i = 0; i < layer.points.size(); ++i) {
      const double dx = layer.points[i].x - c.x, dy = layer.points[i].y - c.y;
      if (dx * dx + dy * dy <= r * r) {
        ++members;
        CHECK(std::binary_search(cand.begin(), cand.end(), ItemRef{i, 0}));
      }
    }
    CHECK(count_points_in_buffer(index, c, r) == members);
  }
  CHECK(SpatialIndex(points("retail", {})).candidates({0, 0}, 1e6).empty());
  const auto single = SpatialIndex(points("retail", {{3, 4}}));
  CHECK(single.candidates({3, 4}, 1.0) == std::vector<ItemRef>{{0, 0}});
}

TEST_CASE("diameter chord is exactly 10 km") {
  const auto layer = roads({{{-6000, 0}, {6000, 0}}});
  CHECK(clip_length_in_buffer(layer, {0, 0}, 5000) == 10.0);
  CHECK(clip_length_in_buffer(SpatialIndex(layer), {0, 0}, 5000) == 10.0);
  const auto vertical = roads({{{150000, 160000}, {150000, 190000}}});
  CHECK(clip_length_in_buffer(vertical, {150000, 170000}, 5000) == 10.0);
}

TEST_CASE("segment outside the disc has zero length and partial segments are exact") {
  CHECK(clip_length_in_buffer(roads({{{6000, 0}, {9000, 0}}}), {0, 0}, 5000) == 0.0);
  CHECK(clip_length_in_buffer(roads({{{0, 0}, {9000, 0}}}), {0, 0}, 5000) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(clip_length_in_buffer(roads({{{-1000, 0}, {1000, 0}}}), {0, 0}, 5000) == doctest::Approx(2.0).epsilon(1e-15));
  // Chord at distance 3 km from the center: 2 * sqrt(25 - 9) = 8 km.
  CHECK(clip_length_in_buffer(roads({{{-9000, 3000}, {9000, 3000}}}), {0, 0}, 5000) ==
        doctest::Approx(8.0).epsilon(1e-14));
  CHECK_THROWS_AS(clip_length_in_buffer(roads({}), {0, 0}, -1.0), DomainError);
}

TEST_CASE("clipped lengths match the sampling oracle") {
  CounterRng rng(5, 3);
  const synth::Box box{-6000, -6000, 6000, 6000};
  double analytic = 0, sampled = 0;
  for (int s = 0; s < 200; ++s) {
    const Polyline seg{{rng.uniform(box.xmin, box.xmax), rng.uniform(box.ymin, box.ymax)},
                       {rng.uniform(box.xmin, box.xmax), rng.uniform(box.ymin, box.ymax)}};
    const std::vector<Polyline> one{seg};
    const double a = clip_length_in_buffer(roads(one), {0, 0}, 4000);
    const double o = synth::oracle_clip_length(one, {0, 0}, 4000, 10000);
    const double len = std::hypot(seg[1].x - seg[0].x, seg[1].y - seg[0].y) / 1000.0;
    CHECK(std::abs(a - o) <= 1e-3 * len);
    analytic += a;
    sampled += o;
  }
  CHECK(std::abs(analytic - sampled) <= 1e-3 * analytic);
}

TEST_CASE("intersections") {
  SUBCASE("two polylines crossing at a shared vertex") {
    const auto l = roads({{{-1, 0}, {0, 0}, {1, 0}}, {{0, -1}, {0, 0}, {0, 1}}});
    const auto x = detect_intersections(l);
    REQUIRE(x.points.size() == 1);
    CHECK(x.points[0] == ProjectedPoint{0, 0});
    CHECK(x.tag == "intersection");
  }
  SUBCASE("a lone straight road has none") {
    CHECK(detect_intersections(roads({{{0, 0}, {1, 0}, {2, 0}, {3, 0}}})).points.empty());
  }
  SUBCASE("two roads joined end to end are not an intersection") {
    CHECK(detect_intersections(roads({{{0, 0}, {1, 0}}, {{1, 0}, {2, 0}}})).points.empty());
  }
  SUBCASE("T junction counts") {
    CHECK(detect_intersections(roads({{{-1, 0}, {0, 0}, {1, 0}}, {{0, 0}, {0, 1}}})).points.size() == 1);
  }
  SUBCASE("vertices within the snap tolerance merge") {
    const auto l = roads({{{-1, 0}, {0, 0}, {1, 0}}, {{0, -1}, {0.0000002, 0.0000001}, {0, 1}}});
    CHECK(detect_intersections(l).points.size() == 1);
  }
  SUBCASE("grid of h horizontal and v vertical lines") {
    for (int h = 1; h <= 6; ++h) {
      for (int v = 1; v <= 5; ++v) {
        std::vector<Polyline> lines;
        for (int i = 0; i < h; ++i) {
          Polyline line;
          for (int j = -1; j <= v; ++j) line.push_back({100.0 * j, 100.0 * i});
          lines.push_back(line);
        }
        for (int j = 0; j < v; ++j) {
          Polyline line;
          for (int i = -1; i <= h; ++i) line.push_back({100.0 * j, 100.0 * i});
          lines.push_back(line);
        }
        CHECK(detect_intersections(roads(lines)).points.size() == static_cast<std::size_t>(h * v));
      }
    }
  }
}

TEST_CASE("env features on empty layers are all zero") {
  const IndexedLayers layers(empty_layers());
  for (double r : kBufferRadiiKm) {
    const auto v = env_features(ProjectedPoint{150000, 170000}, r, layers);
    for (double x : v.values()) CHECK(x == 0.0);
  }
}

TEST_CASE("retail density in a 5 km disc") {
  auto set = empty_layers();
  CounterRng rng(9, 4);
  for (int i = 0; i < 50; ++i) {
    const double rho = 4900 * std::sqrt(rng.uniform());
    const double th = 2 * std::numbers::pi * rng.uniform();
    set["retail"].points.push_back({150000 + rho * std::cos(th), 170000 + rho * std::sin(th)});
  }
  set["school"].points.push_back({150000, 170000});
  const IndexedLayers layers(set);
  const auto v = env_features(ProjectedPoint{150000, 170000}, 5.0, layers);
  CHECK(v.area_km2() == std::numbers::pi * 25.0);
  const auto values = v.values();
  CHECK(values[4] == doctest::Approx(50.0 / (25.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK(std::abs(values[4] * v.area_km2() - 50.0) <= 1e-9 * 50.0);
  CHECK(values[10] == 1.0);  // has_education
  CHECK(values[11] == 0.0);
  CHECK(values[12] == 0.0);
}

TEST_CASE("env feature names and radius labels") {
  const auto& n = EnvFeatureVector::names();
  CHECK(n.front() == "road_len_km_per_km2");
  CHECK(n[1] == "intersection_count_per_km2");
  CHECK(n.back() == "has_fuel_station");
  CHECK(radius_label(0.5) == "r0.5");
  CHECK(radius_label(5) == "r5");
  CHECK(parse_radius_label("r3") == 3.0);
  CHECK_THROWS_AS(radius_label(2.0), DomainError);
}

TEST_CASE("counts and lengths are non-decreasing in the radius") {
  const auto set = synth::random_layer_set(kBox, 60, 400, 21);
  const IndexedLayers layers(set);
  CounterRng rng(21, 5);
  for (int k = 0; k < 20; ++k) {
    const ProjectedPoint c{rng.uniform(kBox.xmin, kBox.xmax), rng.uniform(kBox.ymin, kBox.ymax)};
    EnvFeatureVector prev;
    for (double r : kBufferRadiiKm) {
      const auto v = env_features(c, r, layers);
      const auto t = v.totals();
      const auto p = prev.totals();
      for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] >= p[i]);
      prev = v;
    }
  }
}

TEST_CASE("missing layer is a configuration error") {
  auto set = empty_layers();
  set.erase("fuel");
  CHECK_THROWS_AS(IndexedLayers{set}, ConfigError);
  auto wrong = empty_layers();
  wrong["road"] = points("road", {});
  CHECK_THROWS_AS(IndexedLayers{wrong}, ConfigError);
}

TEST_CASE("parallel env table equals the serial reference") {
  const auto set = synth::random_layer_set(kBox, 80, 500, 33);
  const IndexedLayers layers(set);
  CounterRng rng(33, 6);
  std::vector<ProjectedPoint> centers;
  for (int i = 0; i < 300; ++i) centers.push_back({rng.uniform(kBox.xmin, kBox.xmax), rng.uniform(kBox.ymin, kBox.ymax)});
  for (double r : kBufferRadiiKm) CHECK(env_feature_table(centers, r, layers) == reference::env_feature_table(centers, r, layers));
}

TEST_CASE("land-cover cells are half open and read from the top row") {
  // 2 x 2 grid, origin (0, 0), cell 100: top row 111 112, bottom row 211 311.
  const LandCoverGrid g(0, 0, 100, 2, 2, {111, 112, 211, 311});
  CHECK(g.code_at({50, 150}) == 111);
  CHECK(g.code_at({150, 150}) == 112);
  CHECK(g.code_at({50, 50}) == 211);
  CHECK(g.code_at({100, 0}) == 311);
  CHECK(g.code_at({0, 0}) == 211);
  CHECK_FALSE(g.code_at({200, 50}));
  CHECK_FALSE(g.code_at({-0.001, 50}));
  CHECK_THROWS_AS(LandCoverGrid(0, 0, 100, 2, 2, {111, 112, 211, 999}), DataError);
  CHECK_THROWS_AS(LandCoverGrid(0, 0, 0, 2, 2, {111, 112, 211, 311}), DataError);
  CHECK_THROWS_AS(LandCoverGrid(0, 0, 100, 2, 2, {111, 112, 211}), DataError);
}

TEST_CASE("ESRI ASCII grids round-trip") {
  std::istringstream in(
      "ncols 3\nnrows 2\nxllcorner 1000\nyllcorner 2000\ncellsize 100\nNODATA_value -9999\n"
      "111 112 -9999\n211 311 141\n");
  const auto g = read_esri_ascii(in);
  CHECK(g.width() == 3);
  CHECK(g.height() == 2);
  CHECK(g.code_at({1050, 2150}) == 111);
  CHECK(g.code_at({1250, 2050}) == 141);
  CHECK(g.code_at({1250, 2150}) == -9999);
  std::stringstream out;
  write_esri_ascii(out, g);
  const auto back = read_esri_ascii(out);
  for (double x : {1050.0, 1150.0, 1250.0}) {
    for (double y : {2050.0, 2150.0}) CHECK(back.code_at({x, y}) == g.code_at({x, y}));
  }
  std::istringstream centered("ncols 1\nnrows 1\nxllcenter 50\nyllcenter 50\ncellsize 100\n111\n");
  CHECK(read_esri_ascii(centered).code_at({1, 1}) == 111);
}

TEST_CASE("masking by land cover") {
  const LandCoverGrid g(0, 0, 100, 2, 2, {111, 311, 211, 142});
  const auto keep = artificial_surface_codes();
  SUBCASE("points follow their cell and outside points are counted") {
    const auto r = mask_by_landcover(points("retail", {{50, 150}, {150, 150}, {150, 50}, {500, 500}}), g, keep);
    CHECK(r.layer.points == std::vector<ProjectedPoint>{{50, 150}, {150, 50}});
    CHECK(r.dropped_outside == 1);
  }
  SUBCASE("keeping every code leaves the layer unchanged") {
    const auto layer = roads({{{10, 10}, {190, 190}, {20, 180}}, {{5, 120}, {195, 120}}});
    const auto r = mask_by_landcover(layer, g, corine_codes());
    CHECK(r.layer == layer);
    const auto pts = points("retail", {{10, 10}, {150, 150}});
    CHECK(mask_by_landcover(pts, g, corine_codes()).layer == pts);
  }
  SUBCASE("keeping nothing empties the layer") {
    const auto r = mask_by_landcover(roads({{{10, 10}, {190, 190}}}), g, {});
    CHECK(r.layer.polylines.empty());
  }
  SUBCASE("a segment inside one kept cell keeps its full length") {
    const auto layer = roads({{{110, 10}, {190, 90}}});
    const auto r = mask_by_landcover(layer, g, keep);
    CHECK(r.layer == layer);
  }
  SUBCASE("a crossing segment keeps only the kept cells") {
    // Along y = 150: x in [0,100) is 111 (kept), [100,200) is 311 (dropped).
    const auto r = mask_by_landcover(roads({{{20, 150}, {180, 150}}}), g, keep);
    CHECK(layer_length(r.layer) == doctest::Approx(80.0).epsilon(1e-12));
  }
  SUBCASE("masking is idempotent") {
    CounterRng rng(4, 7);
    const synth::Box box{0, 0, 200, 200};
    const auto layer = synth::random_roads(30, 6, 80, box, rng);
    const auto once = mask_by_landcover(layer, g, keep).layer;
    const auto twice = mask_by_landcover(once, g, keep).layer;
    CHECK(layer_length(twice) == doctest::Approx(layer_length(once)).epsilon(1e-12));
    CHECK(twice.polylines.size() == once.polylines.size());
  }
}

TEST_CASE("GeoJSON layers") {
  const std::string doc = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{"tag":"retail"},"geometry":{"type":"Point","coordinates":[4.39674,50.87064]}},
    {"type":"Feature","properties":{"tag":"road"},"geometry":{"type":"LineString","coordinates":[[4.39,50.87],[4.40,50.88]]}},
    {"type":"Feature","properties":{"tag":"road"},"geometry":{"type":"MultiLineString","coordinates":[[[4.3,50.8],[4.31,50.8]],[[4.3,50.81],[4.31,50.81],[4.32,50.82]]]}},
    {"type":"Feature","properties":{"tag":"school"},"geometry":{"type":"Polygon","coordinates":[[[4.0,50.0],[4.2,50.0],[4.2,50.2],[4.0,50.2],[4.0,50.0]]]}},
    {"type":"Feature","properties":{},"geometry":{"type":"Point","coordinates":[4.0,50.0]}}
  ]})";
  std::istringstream in(doc);
  LayerSet set;
  const auto stats = read_geojson(in, set);
  CHECK(stats.features == 5);
  CHECK(stats.skipped_untagged == 1);
  CHECK(set.at("retail").points.size() == 1);
  const auto brussels = set.at("retail").points[0];
  CHECK(brussels.x == doctest::Approx(152059.236215).epsilon(1e-10));
  CHECK(set.at("road").polylines.size() == 3);
  CHECK(set.at("school").points.size() == 1);
  ensure_required_layers(set);
  CHECK(set.size() == required_layer_tags().size());
  CHECK_NOTHROW(IndexedLayers{set});

  std::istringstream lambert(
      R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{"tag":"fuel"},"geometry":{"type":"Point","coordinates":[150000,170000]}}]})");
  LayerSet l72;
  GeoJsonOptions opt;
  opt.crs = InputCrs::Lambert72;
  read_geojson(lambert, l72, opt);
  CHECK(l72.at("fuel").points[0] == ProjectedPoint{150000, 170000});

  std::istringstream bad("{not json");
  LayerSet none;
  CHECK_THROWS_AS(read_geojson(bad, none), FormatError);
}

TEST_CASE("coverage ratios") {
  CHECK(coverage_ratio({Neighborhood::Shape::Square, 1.5}, 10.0) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(coverage_ratio({Neighborhood::Shape::Disc, 1.0}, std::numbers::pi) == 1.0);
  CHECK(coverage_ratio({Neighborhood::Shape::Disc, 5.0}, 1.0) == 1.0);
  CHECK(coverage_ratio({Neighborhood::Shape::Disc, 0.5}, 100.0) ==
        doctest::Approx(0.25 * std::numbers::pi / 100.0).epsilon(1e-15));
  CHECK_THROWS_AS(coverage_ratio({Neighborhood::Shape::Disc, 1.0}, 0.0), DomainError);
}
