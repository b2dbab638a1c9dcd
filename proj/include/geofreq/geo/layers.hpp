#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "geofreq/geo/projection.hpp"

namespace geofreq::geo {

enum class LayerKind { Point, Polyline };

using Polyline = std::vector<ProjectedPoint>;

/// One tagged map layer in the projected plane.
struct FeatureLayer {
  LayerKind kind = LayerKind::Point;
  std::string tag;
  std::vector<ProjectedPoint> points;  // used when kind == Point
  std::vector<Polyline> polylines;     // used when kind == Polyline

  std::size_t size() const { return kind == LayerKind::Point ? points.size() : polylines.size(); }
  bool operator==(const FeatureLayer&) const = default;
};

/// Throws DataError if a polyline has fewer than two vertices or a coordinate
/// is not finite.
void validate(const FeatureLayer& layer);

using LayerSet = std::map<std::string, FeatureLayer>;

/// Tags env_features needs; "road" is the only polyline layer.
const std::vector<std::string>& required_layer_tags();
LayerKind kind_of_tag(const std::string& tag);

enum class InputCrs { Wgs84, Lambert72 };

struct GeoJsonOptions {
  InputCrs crs = InputCrs::Wgs84;
  bool permissive = false;  // forwarded to the projection window check
  std::string tag_property = "tag";
};

struct GeoJsonStats {
  std::size_t features = 0;
  std::size_t skipped_untagged = 0;
  std::size_t skipped_geometry = 0;
};

/// Reads a GeoJSON FeatureCollection into `into`, creating layers on demand.
/// Point-kind tags accept Point/MultiPoint; other geometries are reduced to
/// the mean of their vertices. The road tag accepts LineString and
/// MultiLineString.
GeoJsonStats read_geojson(std::istream& in, LayerSet& into, const GeoJsonOptions& options = {});

/// Adds an empty layer for every required tag that is absent.
void ensure_required_layers(LayerSet& layers);

}  // namespace geofreq::geo
