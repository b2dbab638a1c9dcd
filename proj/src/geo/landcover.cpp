#include "geofreq/geo/landcover.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <string>

#include "geofreq/csv.hpp"
#include "geofreq/error.hpp"

namespace geofreq::geo {

const std::set<int>& corine_codes() {
  static const std::set<int> codes{111, 112, 121, 122, 123, 124, 131, 132, 133, 141, 142,
                                   211, 212, 213, 221, 222, 223, 231, 241, 242, 243, 244,
                                   311, 312, 313, 321, 322, 323, 324, 331, 332, 333, 334,
                                   335, 411, 412, 421, 422, 423, 511, 512, 521, 522, 523};
  return codes;
}

std::set<int> artificial_surface_codes() {
  std::set<int> out;
  for (int c : corine_codes()) {
    if (c >= 111 && c <= 142) out.insert(c);
  }
  return out;
}

LandCoverGrid::LandCoverGrid(double x_origin, double y_origin, double cell_size, std::size_t width,
                             std::size_t height, std::vector<int> codes, std::optional<int> nodata,
                             const std::set<int>& allowed)
    : x0_(x_origin), y0_(y_origin), cell_(cell_size), width_(width), height_(height),
      codes_(std::move(codes)), nodata_(nodata) {
  if (!(cell_ > 0.0) || !std::isfinite(cell_)) throw DataError("land cover: cell size must be positive");
  if (!std::isfinite(x0_) || !std::isfinite(y0_)) throw DataError("land cover: non-finite origin");
  if (codes_.size() != width_ * height_) throw DataError("land cover: code count does not match extent");
  for (int c : codes_) {
    if (nodata_ && c == *nodata_) continue;
    if (!allowed.contains(c)) throw DataError("land cover: code " + std::to_string(c) + " not in code set");
  }
}

std::optional<int> LandCoverGrid::code_at(ProjectedPoint p) const {
  const double fx = std::floor((p.x - x0_) / cell_);
  const double fy = std::floor((p.y - y0_) / cell_);
  if (!(fx >= 0.0 && fy >= 0.0 && fx < static_cast<double>(width_) && fy < static_cast<double>(height_))) {
    return std::nullopt;
  }
  const auto col = static_cast<std::size_t>(fx);
  const auto row_from_bottom = static_cast<std::size_t>(fy);
  return code(col, height_ - 1 - row_from_bottom);
}

LandCoverGrid read_esri_ascii(std::istream& in, const std::set<int>& allowed) {
  std::map<std::string, double> header;
  bool x_center = false, y_center = false;
  std::string token;
  // Header lines are "key value" pairs; the first numeric token ends the header.
  while (in >> token) {
    std::string key = token;
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (!key.empty() && (std::isdigit(static_cast<unsigned char>(key[0])) || key[0] == '-' || key[0] == '.')) {
      break;
    }
    std::string value;
    if (!(in >> value)) throw FormatError("ESRI ASCII: header key '" + token + "' without value");
    const auto v = csv::parse_double(value);
    if (!v) throw FormatError("ESRI ASCII: bad header value for " + token);
    if (key == "xllcenter") {
      x_center = true;
      key = "xllcorner";
    } else if (key == "yllcenter") {
      y_center = true;
      key = "yllcorner";
    }
    header[key] = *v;
    token.clear();
  }
  for (const char* k : {"ncols", "nrows", "xllcorner", "yllcorner", "cellsize"}) {
    if (!header.contains(k)) throw FormatError(std::string("ESRI ASCII: missing header ") + k);
  }
  const double cell = header["cellsize"];
  const auto width = static_cast<std::size_t>(header["ncols"]);
  const auto height = static_cast<std::size_t>(header["nrows"]);
  const double x0 = header["xllcorner"] - (x_center ? cell / 2.0 : 0.0);
  const double y0 = header["yllcorner"] - (y_center ? cell / 2.0 : 0.0);
  std::optional<int> nodata;
  if (header.contains("nodata_value")) nodata = static_cast<int>(std::lround(header["nodata_value"]));

  std::vector<int> codes;
  codes.reserve(width * height);
  auto push = [&](const std::string& t) {
    const auto v = csv::parse_double(t);
    if (!v || std::floor(*v) != *v) throw FormatError("ESRI ASCII: non-integer cell value '" + t + "'");
    codes.push_back(static_cast<int>(*v));
  };
  if (!token.empty()) push(token);
  while (codes.size() < width * height && in >> token) push(token);
  if (codes.size() != width * height) throw FormatError("ESRI ASCII: fewer cells than ncols*nrows");
  return LandCoverGrid(x0, y0, cell, width, height, std::move(codes), nodata, allowed);
}

void write_esri_ascii(std::ostream& out, const LandCoverGrid& grid) {
  out << "ncols " << grid.width() << "\nnrows " << grid.height() << "\nxllcorner "
      << csv::format_double(grid.x_origin()) << "\nyllcorner " << csv::format_double(grid.y_origin())
      << "\ncellsize " << csv::format_double(grid.cell_size()) << '\n';
  if (grid.nodata()) out << "NODATA_value " << *grid.nodata() << '\n';
  for (std::size_t r = 0; r < grid.height(); ++r) {
    for (std::size_t c = 0; c < grid.width(); ++c) out << (c ? " " : "") << grid.code(c, r);
    out << '\n';
  }
}

namespace {

ProjectedPoint lerp(ProjectedPoint a, ProjectedPoint b, double t) {
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

/// Parameters in (0, 1) where the segment crosses grid lines, plus both ends.
std::vector<double> cut_points(ProjectedPoint a, ProjectedPoint b, const LandCoverGrid& grid, double max_piece) {
  std::vector<double> ts{0.0, 1.0};
  constexpr double eps = 1e-12;
  auto add_crossings = [&](double from, double to, double origin) {
    if (from == to) return;
    const double cell = grid.cell_size();
    const double lo = std::min(from, to), hi = std::max(from, to);
    for (double k = std::ceil((lo - origin) / cell); origin + k * cell <= hi; k += 1.0) {
      const double t = (origin + k * cell - from) / (to - from);
      if (t > eps && t < 1.0 - eps) ts.push_back(t);
    }
  };
  add_crossings(a.x, b.x, grid.x_origin());
  add_crossings(a.y, b.y, grid.y_origin());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  const double length = std::hypot(b.x - a.x, b.y - a.y);
  std::vector<double> out{0.0};
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const double span = ts[i] - ts[i - 1];
    const auto pieces = std::max<double>(1.0, std::ceil(span * length / max_piece));
    for (double k = 1.0; k < pieces; k += 1.0) out.push_back(ts[i - 1] + span * k / pieces);
    out.push_back(ts[i]);
  }
  return out;
}

}  // namespace

MaskResult mask_by_landcover(const FeatureLayer& layer, const LandCoverGrid& grid,
                             const std::set<int>& keep_codes, const MaskOptions& options) {
  MaskResult result;
  result.layer.kind = layer.kind;
  result.layer.tag = layer.tag;
  auto kept = [&](ProjectedPoint p, bool& outside) {
    const auto code = grid.code_at(p);
    outside = !code.has_value();
    return code && keep_codes.contains(*code);
  };

  if (layer.kind == LayerKind::Point) {
    for (const auto& p : layer.points) {
      bool outside = false;
      if (kept(p, outside)) result.layer.points.push_back(p);
      if (outside) ++result.dropped_outside;
    }
    return result;
  }

  for (const auto& line : layer.polylines) {
    Polyline chain;
    bool chain_tail_from_same_segment = false;
    auto flush = [&] {
      if (chain.size() >= 2) result.layer.polylines.push_back(std::move(chain));
      chain.clear();
    };
    for (std::size_t s = 0; s + 1 < line.size(); ++s) {
      const auto a = line[s], b = line[s + 1];
      const auto ts = cut_points(a, b, grid, options.max_piece_m);
      bool first_piece_of_segment = true;
      for (std::size_t i = 1; i < ts.size(); ++i) {
        const auto start = lerp(a, b, ts[i - 1]);
        const auto end = lerp(a, b, ts[i]);
        bool outside = false;
        const bool keep = kept(lerp(a, b, (ts[i - 1] + ts[i]) / 2.0), outside);
        if (outside) ++result.dropped_outside;
        if (!keep) {
          flush();
          first_piece_of_segment = false;
          continue;
        }
        if (!chain.empty() && chain.back() == start) {
          if (!first_piece_of_segment && chain_tail_from_same_segment) {
            chain.back() = end;
          } else {
            chain.push_back(end);
          }
        } else {
          flush();
          chain = {start, end};
        }
        chain_tail_from_same_segment = true;
        first_piece_of_segment = false;
      }
      chain_tail_from_same_segment = false;
    }
    flush();
  }
  return result;
}

}  // namespace geofreq::geo
