#include "geofreq/geo/buffer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "geofreq/error.hpp"

namespace geofreq::geo {

double segment_disc_length(ProjectedPoint a, ProjectedPoint b, ProjectedPoint c, double r) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double fx = a.x - c.x, fy = a.y - c.y;
  const double qa = dx * dx + dy * dy;
  if (qa == 0.0) return 0.0;
  const double qb = fx * dx + fy * dy;
  const double qc = fx * fx + fy * fy - r * r;
  const double disc = qb * qb - qa * qc;
  if (disc <= 0.0) return 0.0;
  const double root = std::sqrt(disc);
  const double t0 = (-qb - root) / qa;
  const double t1 = (-qb + root) / qa;
  if (t0 >= 0.0 && t1 <= 1.0) return 2.0 * std::sqrt(disc / qa);  // full chord
  const double lo = std::max(0.0, t0), hi = std::min(1.0, t1);
  if (hi <= lo) return 0.0;
  return (hi - lo) * std::sqrt(qa);
}

double clip_length_in_buffer(const FeatureLayer& layer, ProjectedPoint center, double radius_m) {
  if (!(radius_m > 0.0)) throw DomainError("buffer radius must be positive");
  double meters = 0.0;
  for (const auto& line : layer.polylines) {
    for (std::size_t s = 0; s + 1 < line.size(); ++s) {
      meters += segment_disc_length(line[s], line[s + 1], center, radius_m);
    }
  }
  return meters / 1000.0;
}

double clip_length_in_buffer(const SpatialIndex& index, ProjectedPoint center, double radius_m) {
  if (!(radius_m > 0.0)) throw DomainError("buffer radius must be positive");
  const auto& lines = index.layer().polylines;
  double meters = 0.0;
  for (const auto& item : index.candidates(center, radius_m)) {
    const auto& line = lines[item.feature];
    meters += segment_disc_length(line[item.segment], line[item.segment + 1], center, radius_m);
  }
  return meters / 1000.0;
}

namespace {
bool in_disc(ProjectedPoint p, ProjectedPoint c, double r) {
  const double dx = p.x - c.x, dy = p.y - c.y;
  return dx * dx + dy * dy <= r * r;
}
}  // namespace

std::size_t count_points_in_buffer(const FeatureLayer& layer, ProjectedPoint center, double radius_m) {
  if (!(radius_m > 0.0)) throw DomainError("buffer radius must be positive");
  return static_cast<std::size_t>(std::count_if(layer.points.begin(), layer.points.end(),
                                                [&](const ProjectedPoint& p) { return in_disc(p, center, radius_m); }));
}

std::size_t count_points_in_buffer(const SpatialIndex& index, ProjectedPoint center, double radius_m) {
  if (!(radius_m > 0.0)) throw DomainError("buffer radius must be positive");
  const auto& points = index.layer().points;
  std::size_t n = 0;
  for (const auto& item : index.candidates(center, radius_m)) {
    if (in_disc(points[item.feature], center, radius_m)) ++n;
  }
  return n;
}

FeatureLayer detect_intersections(const FeatureLayer& roads, double snap_m) {
  struct Node {
    std::set<std::size_t> lines;
    std::size_t degree = 0;
  };
  std::map<std::pair<long long, long long>, Node> nodes;
  for (std::size_t i = 0; i < roads.polylines.size(); ++i) {
    const auto& line = roads.polylines[i];
    for (std::size_t v = 0; v < line.size(); ++v) {
      const std::pair key{std::llround(line[v].x / snap_m), std::llround(line[v].y / snap_m)};
      auto& node = nodes[key];
      node.lines.insert(i);
      node.degree += (v == 0 || v + 1 == line.size()) ? 1 : 2;
    }
  }
  FeatureLayer out;
  out.kind = LayerKind::Point;
  out.tag = "intersection";
  for (const auto& [key, node] : nodes) {
    if (node.lines.size() >= 2 && node.degree >= 3) {
      out.points.push_back({static_cast<double>(key.first) * snap_m, static_cast<double>(key.second) * snap_m});
    }
  }
  return out;
}

double EnvFeatureVector::area_km2() const { return std::numbers::pi * radius_km * radius_km; }

const std::array<std::string_view, EnvFeatureVector::kFields>& EnvFeatureVector::names() {
  static constexpr std::array<std::string_view, kFields> n{
      "road_len_km_per_km2",     "intersection_count_per_km2", "roundabout_count_per_km2",
      "traffic_signal_count_per_km2", "retail_count_per_km2",  "tourism_count_per_km2",
      "parking_count_per_km2",   "school_count_per_km2",       "healthcare_count_per_km2",
      "fuel_count_per_km2",      "has_education",              "has_healthcare",
      "has_fuel_station"};
  return n;
}

const std::array<std::string_view, 10>& EnvFeatureVector::total_names() {
  static constexpr std::array<std::string_view, 10> n{
      "road_len_km",   "intersection_count", "roundabout_count", "traffic_signal_count", "retail_count",
      "tourism_count", "parking_count",      "school_count",     "healthcare_count",     "fuel_count"};
  return n;
}

std::array<double, 10> EnvFeatureVector::totals() const {
  auto d = [](std::size_t c) { return static_cast<double>(c); };
  return {road_len_km,      d(intersection_count), d(roundabout_count), d(traffic_signal_count),
          d(retail_count),  d(tourism_count),      d(parking_count),    d(school_count),
          d(healthcare_count), d(fuel_count)};
}

std::array<double, EnvFeatureVector::kFields> EnvFeatureVector::values() const {
  const auto t = totals();
  std::array<double, kFields> v{};
  for (std::size_t i = 0; i < t.size(); ++i) v[i] = density(t[i]);
  v[10] = school_count > 0 ? 1.0 : 0.0;
  v[11] = healthcare_count > 0 ? 1.0 : 0.0;
  v[12] = fuel_count > 0 ? 1.0 : 0.0;
  return v;
}

std::string radius_label(double radius_km) {
  if (radius_km == 0.5) return "r0.5";
  if (radius_km == 1.0) return "r1";
  if (radius_km == 3.0) return "r3";
  if (radius_km == 5.0) return "r5";
  throw DomainError("buffer radius must be one of 0.5, 1, 3, 5 km");
}

double parse_radius_label(std::string_view label) {
  for (double r : kBufferRadiiKm) {
    if (radius_label(r) == label) return r;
  }
  throw DomainError("unknown radius label '" + std::string(label) + "'");
}

IndexedLayers::IndexedLayers(const LayerSet& layers, double snap_m) {
  for (const auto& tag : required_layer_tags()) {
    const auto it = layers.find(tag);
    if (it == layers.end()) throw ConfigError("missing required layer '" + tag + "'");
    if (it->second.kind != kind_of_tag(tag)) throw ConfigError("layer '" + tag + "' has the wrong geometry kind");
    by_tag_.emplace(tag, SpatialIndex(it->second));
  }
  by_tag_.emplace("intersection", SpatialIndex(detect_intersections(layers.at("road"), snap_m)));
}

const SpatialIndex& IndexedLayers::at(const std::string& tag) const {
  const auto it = by_tag_.find(tag);
  if (it == by_tag_.end()) throw ConfigError("missing required layer '" + tag + "'");
  return it->second;
}

EnvFeatureVector env_features(ProjectedPoint center, double radius_km, const IndexedLayers& layers) {
  radius_label(radius_km);  // validates
  const double r = radius_km * 1000.0;
  auto count = [&](const char* tag) { return count_points_in_buffer(layers.at(tag), center, r); };
  EnvFeatureVector v;
  v.radius_km = radius_km;
  v.road_len_km = clip_length_in_buffer(layers.at("road"), center, r);
  v.intersection_count = count("intersection");
  v.roundabout_count = count("roundabout");
  v.traffic_signal_count = count("traffic_signal");
  v.retail_count = count("retail");
  v.tourism_count = count("tourism");
  v.parking_count = count("parking");
  v.school_count = count("school");
  v.healthcare_count = count("healthcare");
  v.fuel_count = count("fuel");
  return v;
}

EnvFeatureVector env_features(GeoPoint center, double radius_km, const IndexedLayers& layers,
                              const ProjectionOptions& projection) {
  return env_features(project_to_lambert72(center, projection), radius_km, layers);
}

std::vector<EnvFeatureVector> env_feature_table(std::span<const ProjectedPoint> centers, double radius_km,
                                                const IndexedLayers& layers) {
  radius_label(radius_km);
  std::vector<EnvFeatureVector> out(centers.size());
  const auto n = static_cast<std::ptrdiff_t>(centers.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = env_features(centers[i], radius_km, layers);
  return out;
}

namespace reference {
std::vector<EnvFeatureVector> env_feature_table(std::span<const ProjectedPoint> centers, double radius_km,
                                                const IndexedLayers& layers) {
  std::vector<EnvFeatureVector> out;
  out.reserve(centers.size());
  for (const auto& c : centers) out.push_back(env_features(c, radius_km, layers));
  return out;
}
}  // namespace reference

double Neighborhood::area_km2() const {
  return shape == Shape::Disc ? std::numbers::pi * size_km * size_km : (2.0 * size_km) * (2.0 * size_km);
}

double coverage_ratio(const Neighborhood& neighborhood, double postcode_area_km2) {
  if (!(postcode_area_km2 > 0.0)) throw DomainError("postcode area must be positive");
  return std::min(1.0, neighborhood.area_km2() / postcode_area_km2);
}

}  // namespace geofreq::geo
