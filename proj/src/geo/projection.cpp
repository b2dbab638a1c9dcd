#include "geofreq/geo/projection.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "geofreq/error.hpp"

namespace geofreq::geo {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Cone {
  double a, e, n, big_f, rho0, lon0, x0, y0;
};

double conformal_t(double phi, double e) {
  const double s = e * std::sin(phi);
  return std::tan(std::numbers::pi / 4.0 - phi / 2.0) / std::pow((1.0 - s) / (1.0 + s), e / 2.0);
}

double parallel_m(double phi, double e) {
  const double s = std::sin(phi);
  return std::cos(phi) / std::sqrt(1.0 - e * e * s * s);
}

Cone make_cone(const Lambert72Params& p) {
  const double f = 1.0 / p.inverse_flattening;
  const double e = std::sqrt(2.0 * f - f * f);
  const double phi1 = p.standard_parallel_1_deg * kDeg;
  const double phi2 = p.standard_parallel_2_deg * kDeg;
  const double m1 = parallel_m(phi1, e), m2 = parallel_m(phi2, e);
  const double t1 = conformal_t(phi1, e), t2 = conformal_t(phi2, e);
  const double n = (std::log(m1) - std::log(m2)) / (std::log(t1) - std::log(t2));
  const double big_f = m1 / (n * std::pow(t1, n));
  const double phi0 = p.origin_lat_deg * kDeg;
  const double t0 = p.origin_lat_deg == 90.0 ? 0.0 : conformal_t(phi0, e);
  const double rho0 = p.semi_major_m * big_f * std::pow(t0, n);
  return {p.semi_major_m, e, n, big_f, rho0, p.central_meridian_deg * kDeg,
          p.false_easting_m, p.false_northing_m};
}

const Cone& cone_for(const Lambert72Params& p) {
  static const Lambert72Params defaults{};
  static const Cone standard = make_cone(defaults);
  const bool is_default = p.semi_major_m == defaults.semi_major_m &&
                          p.inverse_flattening == defaults.inverse_flattening &&
                          p.standard_parallel_1_deg == defaults.standard_parallel_1_deg &&
                          p.standard_parallel_2_deg == defaults.standard_parallel_2_deg &&
                          p.origin_lat_deg == defaults.origin_lat_deg &&
                          p.central_meridian_deg == defaults.central_meridian_deg &&
                          p.false_easting_m == defaults.false_easting_m &&
                          p.false_northing_m == defaults.false_northing_m;
  if (is_default) return standard;
  thread_local Cone custom{};
  custom = make_cone(p);
  return custom;
}

}  // namespace

ProjectedPoint project_to_lambert72(GeoPoint p, const ProjectionOptions& options) {
  if (!(std::isfinite(p.lat) && std::isfinite(p.lon)) || p.lat < -90.0 || p.lat > 90.0 ||
      p.lon < -180.0 || p.lon > 180.0) {
    throw DomainError("coordinates outside valid latitude/longitude ranges");
  }
  const auto& w = options.window;
  if (!options.permissive &&
      (p.lat < w.lat_min || p.lat > w.lat_max || p.lon < w.lon_min || p.lon > w.lon_max)) {
    throw DomainError("point (" + std::to_string(p.lat) + ", " + std::to_string(p.lon) +
                      ") outside the Lambert 72 validity window");
  }
  if (p.lat <= -90.0) throw DomainError("south pole is not representable on this cone");
  const Cone& c = cone_for(options.params);
  const double phi = p.lat * kDeg;
  const double t = p.lat >= 90.0 ? 0.0 : conformal_t(phi, c.e);
  const double rho = c.a * c.big_f * std::pow(t, c.n);
  const double theta = c.n * (p.lon * kDeg - c.lon0);
  return {c.x0 + rho * std::sin(theta), c.y0 + c.rho0 - rho * std::cos(theta)};
}

GeoPoint inverse_lambert72(ProjectedPoint q, const Lambert72Params& params) {
  if (!std::isfinite(q.x) || !std::isfinite(q.y)) throw DomainError("non-finite projected point");
  const Cone& c = cone_for(params);
  const double dx = q.x - c.x0;
  const double dy = c.rho0 - (q.y - c.y0);
  const double sign = c.n < 0.0 ? -1.0 : 1.0;
  const double rho = sign * std::hypot(dx, dy);
  const double theta = std::atan2(sign * dx, sign * dy);
  const double lon = (theta / c.n + c.lon0) / kDeg;
  if (rho == 0.0) return {sign * 90.0, lon};

  const double t = std::pow(rho / (c.a * c.big_f), 1.0 / c.n);
  double phi = std::numbers::pi / 2.0 - 2.0 * std::atan(t);
  for (int iter = 0; iter < 50; ++iter) {
    const double s = c.e * std::sin(phi);
    const double next =
        std::numbers::pi / 2.0 - 2.0 * std::atan(t * std::pow((1.0 - s) / (1.0 + s), c.e / 2.0));
    if (std::abs(next - phi) < 1e-15) return {next / kDeg, lon};
    phi = next;
  }
  throw NumericError("inverse Lambert 72: latitude iteration did not converge in 50 steps");
}

}  // namespace geofreq::geo
