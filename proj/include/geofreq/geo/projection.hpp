#pragma once

#include <string_view>

namespace geofreq::geo {

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
};

/// Lambert 72 plane coordinates in meters.
struct ProjectedPoint {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const ProjectedPoint&) const = default;
};

/// Lambert Conformal Conic (2SP) constants of the Belgian Lambert 72 grid on
/// the International 1924 ellipsoid. Changing any value is a breaking change
/// of every derived geometry; bump `version` with it.
struct Lambert72Params {
  std::string_view version = "lambert72-lcc2sp-intl1924-v1";
  double semi_major_m = 6378388.0;
  double inverse_flattening = 297.0;
  double standard_parallel_1_deg = 51.16666723333333;  // 51°10'00.00204"
  double standard_parallel_2_deg = 49.8333339;         // 49°50'00.00204"
  double origin_lat_deg = 90.0;
  double central_meridian_deg = 4.367486666666667;  // 4°22'02.952"
  double false_easting_m = 150000.013;
  double false_northing_m = 5400088.438;
};

/// Belgium plus margin; inputs outside are rejected unless permissive.
struct ProjectionWindow {
  double lat_min = 49.0, lat_max = 52.0;
  double lon_min = 2.0, lon_max = 7.0;
};

struct ProjectionOptions {
  bool permissive = false;
  ProjectionWindow window{};
  Lambert72Params params{};
};

/// Throws DomainError for points outside the window (or outside valid
/// lat/long ranges even when permissive).
ProjectedPoint project_to_lambert72(GeoPoint p, const ProjectionOptions& options = {});

/// Inverse mapping. Throws DomainError on non-finite input and NumericError if
/// the latitude iteration has not converged after 50 steps.
GeoPoint inverse_lambert72(ProjectedPoint q, const Lambert72Params& params = {});

}  // namespace geofreq::geo
