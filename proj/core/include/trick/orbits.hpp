#pragma once

// Circular two-body orbits, Walker constellations and visibility queries.
// No J2 or drag: coverage statistics are taken over a single period where
// secular drift is negligible.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "trick/config.hpp"
#include "trick/geodesy.hpp"

namespace trick {

using SatId = int;

struct SatelliteState {
  SatId id = 0;
  EcefVector position = EcefVector::Zero();
};

struct OrbitElements {
  double semi_major_axis_m = 0.0;
  double inclination_deg = 0.0;
  double raan_deg = 0.0;
  double initial_anomaly_deg = 0.0;
  double epoch_s = 0.0;
};

enum class WalkerPattern { delta, star };

struct ConstellationSpec {
  std::string name;
  int total_satellites = 0;
  int planes = 1;
  int phasing = 0;
  double altitude_m = 0.0;  // above the mean Earth radius
  double inclination_deg = 0.0;
  WalkerPattern pattern = WalkerPattern::delta;

  /// Throws InvalidSpec on a non-positive plane count, indivisible
  /// satellite count, out-of-range phasing or non-positive altitude.
  void validate() const;
  double semi_major_axis_m() const;
};

struct Satellite {
  SatId id = 0;
  std::string name;
  OrbitElements elements;
};

struct GroundStation {
  std::string name;
  GeodeticPoint location;
};

double orbital_period(double semi_major_axis_m);

/// Earth-centered inertial position; coincides with ECEF at t = 0.
EcefVector propagate_inertial(const OrbitElements& e, double t);
EcefVector propagate(const OrbitElements& e, double t);

std::vector<OrbitElements> generate_walker(const ConstellationSpec& spec);

/// Walker elements tagged with ids id_base + index and names "<name>-<index>".
std::vector<Satellite> build_constellation(const ConstellationSpec& spec, SatId id_base);

/// Satellites at or above `min_elev_deg` as seen from `observer` at time t.
std::vector<SatelliteState> visible_satellites(const EcefVector& observer, std::span<const Satellite> sats, double t,
                                               double min_elev_deg);
std::vector<SatelliteState> visible_satellites(const GroundStation& gs, std::span<const Satellite> sats, double t,
                                               double min_elev_deg);

/// Slant range at exactly `min_elev_deg`, divided by c. Spherical Earth of
/// mean radius with the constellation's altitude.
double max_tof_bound(const ConstellationSpec& spec, double min_elev_deg);
double slant_range_at_elevation(double altitude_m, double elevation_deg);

std::vector<ConstellationSpec> load_constellations(const std::filesystem::path& path);
ConstellationSpec read_constellation(const ConfigSection& section, const std::string& source);
ConfigSection constellation_section(const ConstellationSpec& spec);

std::vector<GroundStation> load_stations(const std::filesystem::path& path);
ConfigSection station_section(const GroundStation& station);

}  // namespace trick
