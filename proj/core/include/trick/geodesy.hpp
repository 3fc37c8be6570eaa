#pragma once

#include <Eigen/Core>

namespace trick {

/// Earth-centered Earth-fixed position in meters.
using EcefVector = Eigen::Vector3d;
using UnitVector = Eigen::Vector3d;

struct GeodeticPoint {
  double latitude_deg = 0.0;   // [-90, 90]
  double longitude_deg = 0.0;  // [-180, 180)
  double altitude_m = 0.0;     // above the WGS-84 ellipsoid
};

/// Minor spherical triangle on the unit sphere.
struct SphericalTriangle {
  UnitVector a;
  UnitVector b;
  UnitVector c;
};

EcefVector geodetic_to_ecef(const GeodeticPoint& p);

/// Bowring-style fixed-point iteration; converges to machine precision in a
/// handful of steps for anything between the Earth's mantle and GEO.
/// Throws DegenerateInput within 1 m of the Earth's center.
GeodeticPoint ecef_to_geodetic(const EcefVector& v);

/// Elevation of `target` above the plane perpendicular to the observer's
/// geocentric radial, in degrees.
double elevation_angle(const EcefVector& observer, const EcefVector& target);

/// Spherical ground projection: the satellite direction as a unit vector.
UnitVector subsatellite_point(const EcefVector& sat);

/// Boundary-inclusive containment in the cone spanned by the triangle's
/// vertices. Triple products within +-1e-12 count as inside.
bool point_in_spherical_triangle(const UnitVector& p, const SphericalTriangle& t);

/// Solid angle in steradians (Van Oosterom-Strackee).
double solid_angle(const SphericalTriangle& t);

/// Columns are the local east, north and up unit vectors at the point's
/// geodetic latitude/longitude.
Eigen::Matrix3d enu_basis(const GeodeticPoint& p);

double great_circle_distance_m(const GeodeticPoint& a, const GeodeticPoint& b);

}  // namespace trick
