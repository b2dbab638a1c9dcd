#include "geofreq/geo/layers.hpp"

#include <cmath>
#include <json.hpp>

#include "geofreq/error.hpp"

namespace geofreq::geo {
namespace {

using nlohmann::json;

ProjectedPoint to_plane(const json& pos, const GeoJsonOptions& options) {
  if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
    throw FormatError("GeoJSON position must be [x, y]");
  }
  const double a = pos[0].get<double>();
  const double b = pos[1].get<double>();
  if (options.crs == InputCrs::Lambert72) return {a, b};
  ProjectionOptions po;
  po.permissive = options.permissive;
  return project_to_lambert72({b, a}, po);  // GeoJSON order is [long, lat]
}

void collect_positions(const json& coords, int depth, std::vector<ProjectedPoint>& out,
                       const GeoJsonOptions& options) {
  if (depth == 0) {
    out.push_back(to_plane(coords, options));
    return;
  }
  for (const auto& c : coords) collect_positions(c, depth - 1, out, options);
}

int nesting_of(const std::string& type) {
  if (type == "Point") return 0;
  if (type == "MultiPoint" || type == "LineString") return 1;
  if (type == "MultiLineString" || type == "Polygon") return 2;
  if (type == "MultiPolygon") return 3;
  return -1;
}

}  // namespace

void validate(const FeatureLayer& layer) {
  auto finite = [](const ProjectedPoint& p) { return std::isfinite(p.x) && std::isfinite(p.y); };
  for (const auto& p : layer.points) {
    if (!finite(p)) throw DataError("layer " + layer.tag + ": non-finite point");
  }
  for (const auto& line : layer.polylines) {
    if (line.size() < 2) throw DataError("layer " + layer.tag + ": polyline with fewer than 2 vertices");
    for (const auto& p : line) {
      if (!finite(p)) throw DataError("layer " + layer.tag + ": non-finite vertex");
    }
  }
}

const std::vector<std::string>& required_layer_tags() {
  static const std::vector<std::string> tags{"road",   "roundabout", "traffic_signal",
                                             "retail", "tourism",    "parking",
                                             "school", "healthcare", "fuel"};
  return tags;
}

LayerKind kind_of_tag(const std::string& tag) {
  return tag == "road" ? LayerKind::Polyline : LayerKind::Point;
}

GeoJsonStats read_geojson(std::istream& in, LayerSet& into, const GeoJsonOptions& options) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("GeoJSON parse error: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features")) {
    throw FormatError("GeoJSON root must be a FeatureCollection");
  }
  GeoJsonStats stats;
  for (const auto& feature : doc["features"]) {
    ++stats.features;
    const auto props = feature.find("properties");
    if (props == feature.end() || !props->is_object() || !props->contains(options.tag_property) ||
        !(*props)[options.tag_property].is_string()) {
      ++stats.skipped_untagged;
      continue;
    }
    const std::string tag = (*props)[options.tag_property].get<std::string>();
    const auto geom = feature.find("geometry");
    if (geom == feature.end() || !geom->is_object()) {
      ++stats.skipped_geometry;
      continue;
    }
    const std::string type = geom->value("type", "");
    const int depth = nesting_of(type);
    if (depth < 0 || !geom->contains("coordinates")) {
      ++stats.skipped_geometry;
      continue;
    }
    const auto& coords = (*geom)["coordinates"];
    auto& layer = into[tag];
    if (layer.tag.empty()) {
      layer.tag = tag;
      layer.kind = kind_of_tag(tag);
    }

    if (layer.kind == LayerKind::Polyline) {
      if (type == "LineString") {
        Polyline line;
        collect_positions(coords, 1, line, options);
        layer.polylines.push_back(std::move(line));
      } else if (type == "MultiLineString") {
        for (const auto& part : coords) {
          Polyline line;
          collect_positions(part, 1, line, options);
          layer.polylines.push_back(std::move(line));
        }
      } else {
        ++stats.skipped_geometry;
      }
      continue;
    }

    std::vector<ProjectedPoint> vertices;
    collect_positions(coords, depth, vertices, options);
    if (vertices.empty()) {
      ++stats.skipped_geometry;
      continue;
    }
    if (type == "Point" || type == "MultiPoint") {
      layer.points.insert(layer.points.end(), vertices.begin(), vertices.end());
    } else {
      ProjectedPoint mean{};
      for (const auto& v : vertices) {
        mean.x += v.x;
        mean.y += v.y;
      }
      mean.x /= static_cast<double>(vertices.size());
      mean.y /= static_cast<double>(vertices.size());
      layer.points.push_back(mean);
    }
  }
  for (const auto& [tag, layer] : into) validate(layer);
  return stats;
}

void ensure_required_layers(LayerSet& layers) {
  for (const auto& tag : required_layer_tags()) {
    auto& layer = layers[tag];
    if (layer.tag.empty()) {
      layer.tag = tag;
      layer.kind = kind_of_tag(tag);
    }
  }
}

}  // namespace geofreq::geo
