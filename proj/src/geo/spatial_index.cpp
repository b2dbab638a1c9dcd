#include "geofreq/geo/spatial_index.hpp"

#include <algorithm>
#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

namespace geofreq::geo {
namespace {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;
using BPoint = bg::model::point<double, 2, bg::cs::cartesian>;
using BBox = bg::model::box<BPoint>;
using Entry = std::pair<BBox, ItemRef>;

BBox box_of(ProjectedPoint a, ProjectedPoint b) {
  return BBox(BPoint(std::min(a.x, b.x), std::min(a.y, b.y)), BPoint(std::max(a.x, b.x), std::max(a.y, b.y)));
}

}  // namespace

struct SpatialIndex::Tree {
  bgi::rtree<Entry, bgi::rstar<16>> rtree;
};

SpatialIndex::SpatialIndex(FeatureLayer layer) : layer_(std::move(layer)), tree_(std::make_unique<Tree>()) {
  validate(layer_);
  std::vector<Entry> entries;
  if (layer_.kind == LayerKind::Point) {
    for (std::size_t i = 0; i < layer_.points.size(); ++i) {
      entries.emplace_back(box_of(layer_.points[i], layer_.points[i]), ItemRef{i, 0});
    }
  } else {
    for (std::size_t i = 0; i < layer_.polylines.size(); ++i) {
      const auto& line = layer_.polylines[i];
      for (std::size_t s = 0; s + 1 < line.size(); ++s) {
        entries.emplace_back(box_of(line[s], line[s + 1]), ItemRef{i, s});
      }
    }
  }
  // Bulk loading (packing) gives a deterministic, balanced tree.
  tree_->rtree = bgi::rtree<Entry, bgi::rstar<16>>(entries.begin(), entries.end());
}

SpatialIndex::~SpatialIndex() = default;
SpatialIndex::SpatialIndex(SpatialIndex&&) noexcept = default;
SpatialIndex& SpatialIndex::operator=(SpatialIndex&&) noexcept = default;

std::vector<ItemRef> SpatialIndex::candidates(ProjectedPoint center, double radius) const {
  const BBox query(BPoint(center.x - radius, center.y - radius), BPoint(center.x + radius, center.y + radius));
  std::vector<Entry> hits;
  tree_->rtree.query(bgi::intersects(query), std::back_inserter(hits));
  std::vector<ItemRef> out;
  out.reserve(hits.size());
  for (const auto& h : hits) out.push_back(h.second);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace geofreq::geo
