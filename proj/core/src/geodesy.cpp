#include "trick/geodesy.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "trick/constants.hpp"
#include "trick/errors.hpp"

namespace trick {
namespace {

constexpr double kContainmentTolerance = 1e-12;

double wrap_longitude(double lon_deg) {
  double wrapped = std::fmod(lon_deg + 180.0, 360.0);
  if (wrapped < 0.0) wrapped += 360.0;
  wrapped -= 180.0;
  return wrapped >= 180.0 ? wrapped - 360.0 : wrapped;
}

}  // namespace

EcefVector geodetic_to_ecef(const GeodeticPoint& p) {
  const double lat = p.latitude_deg * kDegToRad;
  const double lon = p.longitude_deg * kDegToRad;
  const double sin_lat = std::sin(lat);
  const double cos_lat = std::cos(lat);
  const double n = kWgs84SemiMajor / std::sqrt(1.0 - kWgs84EccentricitySq * sin_lat * sin_lat);
  return {(n + p.altitude_m) * cos_lat * std::cos(lon), (n + p.altitude_m) * cos_lat * std::sin(lon),
          (n * (1.0 - kWgs84EccentricitySq) + p.altitude_m) * sin_lat};
}

GeodeticPoint ecef_to_geodetic(const EcefVector& v) {
  if (!v.allFinite() || v.norm() <= 1.0)
    throw Error(ErrorCode::degenerate_input, "ecef_to_geodetic: position within 1 m of Earth's center");

  constexpr double a = kWgs84SemiMajor;
  constexpr double b = kWgs84SemiMinor;
  constexpr double e2 = kWgs84EccentricitySq;
  const double ep2 = (a * a - b * b) / (b * b);

  const double p = std::hypot(v.x(), v.y());
  const double lon = std::atan2(v.y(), v.x());

  // Parametric latitude seed, then refine geodetic latitude.
  double beta = std::atan2(v.z() * a, p * b);
  double lat = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double sb = std::sin(beta);
    const double cb = std::cos(beta);
    const double next = std::atan2(v.z() + ep2 * b * sb * sb * sb, p - e2 * a * cb * cb * cb);
    const double converged = std::abs(next - lat);
    lat = next;
    beta = std::atan2((1.0 - kWgs84Flattening) * std::sin(lat), std::cos(lat));
    if (i > 0 && converged < 1e-15) break;
  }

  const double sin_lat = std::sin(lat);
  const double cos_lat = std::cos(lat);
  const double n = a / std::sqrt(1.0 - e2 * sin_lat * sin_lat);
  const double h = p * cos_lat + (v.z() + e2 * n * sin_lat) * sin_lat - n;

  return {lat * kRadToDeg, wrap_longitude(lon * kRadToDeg), h};
}

double elevation_angle(const EcefVector& observer, const EcefVector& target) {
  const EcefVector los = target - observer;
  const double range = los.norm();
  if (range == 0.0) throw Error(ErrorCode::degenerate_input, "elevation_angle: observer and target coincide");
  const double r = observer.norm();
  if (r == 0.0) throw Error(ErrorCode::degenerate_input, "elevation_angle: observer at Earth's center");
  // atan2 keeps full precision near the zenith where asin does not.
  const EcefVector up = observer / r;
  return std::atan2(up.dot(los), up.cross(los).norm()) * kRadToDeg;
}

UnitVector subsatellite_point(const EcefVector& sat) { return sat.normalized(); }

bool point_in_spherical_triangle(const UnitVector& p, const SphericalTriangle& t) {
  const double orientation = t.a.dot(t.b.cross(t.c));
  const double sign = orientation >= 0.0 ? 1.0 : -1.0;
  const double ab = sign * t.a.cross(t.b).dot(p);
  const double bc = sign * t.b.cross(t.c).dot(p);
  const double ca = sign * t.c.cross(t.a).dot(p);
  return ab >= -kContainmentTolerance && bc >= -kContainmentTolerance && ca >= -kContainmentTolerance;
}

double solid_angle(const SphericalTriangle& t) {
  const double numerator = std::abs(t.a.dot(t.b.cross(t.c)));
  const double denominator = 1.0 + t.a.dot(t.b) + t.b.dot(t.c) + t.c.dot(t.a);
  return 2.0 * std::atan2(numerator, denominator);
}

Eigen::Matrix3d enu_basis(const GeodeticPoint& p) {
  const double lat = p.latitude_deg * kDegToRad;
  const double lon = p.longitude_deg * kDegToRad;
  Eigen::Matrix3d m;
  m.col(0) << -std::sin(lon), std::cos(lon), 0.0;
  m.col(1) << -std::sin(lat) * std::cos(lon), -std::sin(lat) * std::sin(lon), std::cos(lat);
  m.col(2) << std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat);
  return m;
}

double great_circle_distance_m(const GeodeticPoint& a, const GeodeticPoint& b) {
  const UnitVector ua = geodetic_to_ecef({a.latitude_deg, a.longitude_deg, 0.0}).normalized();
  const UnitVector ub = geodetic_to_ecef({b.latitude_deg, b.longitude_deg, 0.0}).normalized();
  return kEarthMeanRadius * std::atan2(ua.cross(ub).norm(), ua.dot(ub));
}

}  // namespace trick
