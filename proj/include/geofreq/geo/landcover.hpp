#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <vector>

#include "geofreq/geo/layers.hpp"

namespace geofreq::geo {

/// The 44 CORINE Land Cover level-3 class codes.
const std::set<int>& corine_codes();
/// Artificial surfaces, codes 111 through 142.
std::set<int> artificial_surface_codes();

/// Classified raster in the projected plane. Rows are stored north to south as
/// in ESRI ASCII grids.
class LandCoverGrid {
 public:
  /// Throws DataError on a non-positive cell size, a size mismatch, or a code
  /// outside `allowed` (the nodata value is always allowed).
  LandCoverGrid(double x_origin, double y_origin, double cell_size, std::size_t width,
                std::size_t height, std::vector<int> codes, std::optional<int> nodata = std::nullopt,
                const std::set<int>& allowed = corine_codes());

  double x_origin() const { return x0_; }
  double y_origin() const { return y0_; }
  double cell_size() const { return cell_; }
  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::optional<int> nodata() const { return nodata_; }

  /// Code of the cell containing p; nullopt outside the extent. Cells are
  /// half-open [x, x + size) x [y, y + size).
  std::optional<int> code_at(ProjectedPoint p) const;
  int code(std::size_t col, std::size_t row_from_top) const { return codes_[row_from_top * width_ + col]; }

 private:
  double x0_, y0_, cell_;
  std::size_t width_, height_;
  std::vector<int> codes_;
  std::optional<int> nodata_;
};

/// Reads an ESRI ASCII grid (ncols/nrows/xllcorner|xllcenter/
/// yllcorner|yllcenter/cellsize/NODATA_value header).
LandCoverGrid read_esri_ascii(std::istream& in, const std::set<int>& allowed = corine_codes());
void write_esri_ascii(std::ostream& out, const LandCoverGrid& grid);

struct MaskOptions {
  double max_piece_m = 50.0;
};

struct MaskResult {
  FeatureLayer layer;
  std::size_t dropped_outside = 0;  // points or polyline pieces beyond the raster
};

/// Keeps points whose cell code is in keep_codes. Polylines are cut at cell
/// boundaries and into pieces of at most max_piece_m; a piece survives when the
/// cell under its midpoint is kept, and consecutive survivors are re-joined.
MaskResult mask_by_landcover(const FeatureLayer& layer, const LandCoverGrid& grid,
                             const std::set<int>& keep_codes, const MaskOptions& options = {});

}  // namespace geofreq::geo
