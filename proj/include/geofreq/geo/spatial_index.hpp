#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "geofreq/geo/layers.hpp"

namespace geofreq::geo {

/// Reference to one indexed item: a point, or one segment of a polyline.
struct ItemRef {
  std::size_t feature = 0;
  std::size_t segment = 0;  // 0 for points

  bool operator==(const ItemRef&) const = default;
  auto operator<=>(const ItemRef&) const = default;
};

/// Immutable R-tree over a layer's points or polyline segments. Built once,
/// then safe to query from many threads.
class SpatialIndex {
 public:
  explicit SpatialIndex(FeatureLayer layer);
  ~SpatialIndex();
  SpatialIndex(SpatialIndex&&) noexcept;
  SpatialIndex& operator=(SpatialIndex&&) noexcept;

  const FeatureLayer& layer() const { return layer_; }

  /// Items whose bounding box intersects the bounding box of the disc,
  /// sorted. A superset of the items that touch the disc.
  std::vector<ItemRef> candidates(ProjectedPoint center, double radius) const;

 private:
  struct Tree;
  FeatureLayer layer_;
  std::unique_ptr<Tree> tree_;
};

}  // namespace geofreq::geo
