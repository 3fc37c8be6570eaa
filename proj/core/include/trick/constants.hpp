#pragma once

namespace trick {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact

// WGS-84
inline constexpr double kWgs84SemiMajor = 6378137.0;
inline constexpr double kWgs84Flattening = 1.0 / 298.257223563;
inline constexpr double kWgs84SemiMinor = kWgs84SemiMajor * (1.0 - kWgs84Flattening);
inline constexpr double kWgs84EccentricitySq = kWgs84Flattening * (2.0 - kWgs84Flattening);

/// Spherical Earth used for orbit altitudes and slant-range bounds.
inline constexpr double kEarthMeanRadius = 6371000.0;
inline constexpr double kEarthGravParam = 3.986004418e14;     // m^3/s^2
inline constexpr double kEarthRotationRate = 7.2921151467e-5;  // rad/s

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

}  // namespace trick
