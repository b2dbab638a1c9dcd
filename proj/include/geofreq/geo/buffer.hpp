#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geofreq/geo/layers.hpp"
#include "geofreq/geo/projection.hpp"
#include "geofreq/geo/spatial_index.hpp"

namespace geofreq::geo {

/// Length in meters of segment [a, b] inside the closed disc (c, r).
double segment_disc_length(ProjectedPoint a, ProjectedPoint b, ProjectedPoint c, double r);

/// Total polyline length inside the disc, in kilometers. Scans every segment.
double clip_length_in_buffer(const FeatureLayer& layer, ProjectedPoint center, double radius_m);
double clip_length_in_buffer(const SpatialIndex& index, ProjectedPoint center, double radius_m);

/// Points at Euclidean distance <= radius. Scans every point.
std::size_t count_points_in_buffer(const FeatureLayer& layer, ProjectedPoint center, double radius_m);
std::size_t count_points_in_buffer(const SpatialIndex& index, ProjectedPoint center, double radius_m);

/// Vertices (snapped to `snap_m`) shared by at least two polylines with at
/// least three incident segments in total. Sorted by snapped (x, y).
FeatureLayer detect_intersections(const FeatureLayer& roads, double snap_m = 1e-3);

/// Built-environment metrics inside one buffer.
struct EnvFeatureVector {
  static constexpr std::size_t kFields = 13;

  double radius_km = 0.0;
  double road_len_km = 0.0;
  std::size_t intersection_count = 0;
  std::size_t roundabout_count = 0;
  std::size_t traffic_signal_count = 0;
  std::size_t retail_count = 0;
  std::size_t tourism_count = 0;
  std::size_t parking_count = 0;
  std::size_t school_count = 0;
  std::size_t healthcare_count = 0;
  std::size_t fuel_count = 0;

  double area_km2() const;
  double density(double total) const { return total / area_km2(); }

  /// Densities and presence flags in names() order.
  std::array<double, kFields> values() const;
  /// Raw totals (road km and counts) in total_names() order.
  std::array<double, 10> totals() const;

  static const std::array<std::string_view, kFields>& names();
  static const std::array<std::string_view, 10>& total_names();

  bool operator==(const EnvFeatureVector&) const = default;
};

/// Radii the feature files are defined for.
inline constexpr std::array<double, 4> kBufferRadiiKm{0.5, 1.0, 3.0, 5.0};

/// "r0.5", "r1", "r3", "r5". Throws DomainError for other radii.
std::string radius_label(double radius_km);
double parse_radius_label(std::string_view label);

/// Indexed copies of the (masked) layers plus the derived "intersection" layer.
class IndexedLayers {
 public:
  /// Throws ConfigError when a required tag is missing.
  explicit IndexedLayers(const LayerSet& layers, double snap_m = 1e-3);

  const SpatialIndex& at(const std::string& tag) const;
  bool contains(const std::string& tag) const { return by_tag_.contains(tag); }

 private:
  std::map<std::string, SpatialIndex> by_tag_;
};

EnvFeatureVector env_features(ProjectedPoint center, double radius_km, const IndexedLayers& layers);
EnvFeatureVector env_features(GeoPoint center, double radius_km, const IndexedLayers& layers,
                              const ProjectionOptions& projection = {});

/// One feature vector per center, computed in parallel over centers.
std::vector<EnvFeatureVector> env_feature_table(std::span<const ProjectedPoint> centers, double radius_km,
                                                const IndexedLayers& layers);

namespace reference {
/// Serial version of geo::env_feature_table.
std::vector<EnvFeatureVector> env_feature_table(std::span<const ProjectedPoint> centers, double radius_km,
                                                const IndexedLayers& layers);
}  // namespace reference

struct Neighborhood {
  enum class Shape { Disc, Square };
  Shape shape = Shape::Disc;
  double size_km = 1.0;  // radius for discs, apothem (half side) for squares

  double area_km2() const;
};

/// Share of a postcode's area the neighborhood could cover, capped at 1.
double coverage_ratio(const Neighborhood& neighborhood, double postcode_area_km2);

}  // namespace geofreq::geo
