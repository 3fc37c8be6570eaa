#include "trick/orbits.hpp"

#include <cmath>

#include "trick/constants.hpp"
#include "trick/errors.hpp"

namespace trick {

void ConstellationSpec::validate() const {
  if (planes < 1) throw Error(ErrorCode::invalid_spec, name + ": planes must be >= 1");
  if (total_satellites < 0) throw Error(ErrorCode::invalid_spec, name + ": negative satellite count");
  if (total_satellites % planes != 0)
    throw Error(ErrorCode::invalid_spec, name + ": " + std::to_string(total_satellites) +
                                             " satellites not divisible into " + std::to_string(planes) + " planes");
  if (phasing < 0 || phasing >= planes)
    throw Error(ErrorCode::invalid_spec, name + ": phasing must lie in [0, planes)");
  if (!(altitude_m > 0.0)) throw Error(ErrorCode::invalid_spec, name + ": altitude must be positive");
}

double ConstellationSpec::semi_major_axis_m() const { return kEarthMeanRadius + altitude_m; }

double orbital_period(double semi_major_axis_m) {
  return 2.0 * kPi * std::sqrt(semi_major_axis_m * semi_major_axis_m * semi_major_axis_m / kEarthGravParam);
}

EcefVector propagate_inertial(const OrbitElements& e, double t) {
  const double a = e.semi_major_axis_m;
  const double n = std::sqrt(kEarthGravParam / (a * a * a));
  const double u = e.initial_anomaly_deg * kDegToRad + n * (t - e.epoch_s);
  const double raan = e.raan_deg * kDegToRad;
  const double inc = e.inclination_deg * kDegToRad;
  const double cu = std::cos(u), su = std::sin(u);
  const double co = std::cos(raan), so = std::sin(raan);
  const double ci = std::cos(inc), si = std::sin(inc);
  return {a * (co * cu - so * su * ci), a * (so * cu + co * su * ci), a * su * si};
}

EcefVector propagate(const OrbitElements& e, double t) {
  const EcefVector r = propagate_inertial(e, t);
  const double theta = kEarthRotationRate * t;
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * r.x() + s * r.y(), -s * r.x() + c * r.y(), r.z()};
}

std::vector<OrbitElements> generate_walker(const ConstellationSpec& spec) {
  spec.validate();
  std::vector<OrbitElements> out;
  if (spec.total_satellites == 0) return out;
  out.reserve(static_cast<size_t>(spec.total_satellites));
  const int per_plane = spec.total_satellites / spec.planes;
  const double raan_span = spec.pattern == WalkerPattern::delta ? 360.0 : 180.0;
  const double raan_step = raan_span / spec.planes;
  const double anomaly_step = 360.0 / per_plane;
  const double phase_step = 360.0 * spec.phasing / spec.total_satellites;
  for (int p = 0; p < spec.planes; ++p) {
    for (int k = 0; k < per_plane; ++k) {
      OrbitElements e;
      e.semi_major_axis_m = spec.semi_major_axis_m();
      e.inclination_deg = spec.inclination_deg;
      e.raan_deg = p * raan_step;
      e.initial_anomaly_deg = std::fmod(k * anomaly_step + p * phase_step, 360.0);
      out.push_back(e);
    }
  }
  return out;
}

std::vector<Satellite> build_constellation(const ConstellationSpec& spec, SatId id_base) {
  auto elements = generate_walker(spec);
  std::vector<Satellite> out;
  out.reserve(elements.size());
  for (size_t i = 0; i < elements.size(); ++i)
    out.push_back({id_base + static_cast<SatId>(i), spec.name + "-" + std::to_string(i), elements[i]});
  return out;
}

std::vector<SatelliteState> visible_satellites(const EcefVector& observer, std::span<const Satellite> sats, double t,
                                               double min_elev_deg) {
  if (!(min_elev_deg >= 0.0 && min_elev_deg <= 90.0))
    throw Error(ErrorCode::invalid_argument, "elevation mask must lie in [0, 90] degrees");
  std::vector<SatelliteState> out;
  for (const auto& sat : sats) {
    const EcefVector pos = propagate(sat.elements, t);
    if (elevation_angle(observer, pos) >= min_elev_deg) out.push_back({sat.id, pos});
  }
  return out;
}

std::vector<SatelliteState> visible_satellites(const GroundStation& gs, std::span<const Satellite> sats, double t,
                                               double min_elev_deg) {
  return visible_satellites(geodetic_to_ecef(gs.location), sats, t, min_elev_deg);
}

double slant_range_at_elevation(double altitude_m, double elevation_deg) {
  const double r = kEarthMeanRadius;
  const double rs = r + altitude_m;
  const double e = elevation_deg * kDegToRad;
  const double ce = std::cos(e);
  return std::sqrt(rs * rs - r * r * ce * ce) - r * std::sin(e);
}

double max_tof_bound(const ConstellationSpec& spec, double min_elev_deg) {
  return slant_range_at_elevation(spec.altitude_m, min_elev_deg) / kSpeedOfLight;
}

ConstellationSpec read_constellation(const ConfigSection& section, const std::string& source) {
  SectionReader r(section, source);
  ConstellationSpec spec;
  spec.name = r.text("name");
  spec.total_satellites = static_cast<int>(r.integer("satellites"));
  spec.planes = static_cast<int>(r.integer("planes"));
  spec.phasing = static_cast<int>(r.integer("phasing", 0));
  spec.altitude_m = r.number("altitude_km") * 1000.0;
  spec.inclination_deg = r.number("inclination_deg");
  const auto pattern = r.text("pattern", "delta");
  if (pattern == "delta") {
    spec.pattern = WalkerPattern::delta;
  } else if (pattern == "star") {
    spec.pattern = WalkerPattern::star;
  } else {
    r.fail("pattern", "expected 'delta' or 'star', got '" + pattern + "'");
  }
  r.finish();
  try {
    spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::config_error, source + ":" + std::to_string(section.line) + ": " + e.what());
  }
  return spec;
}

std::vector<ConstellationSpec> load_constellations(const std::filesystem::path& path) {
  const auto doc = load_config(path);
  std::vector<ConstellationSpec> out;
  for (const auto& section : doc.sections) {
    if (section.name != "constellation")
      throw Error(ErrorCode::config_error,
                  doc.source + ":" + std::to_string(section.line) + ": unknown section [" + section.name + "]");
    out.push_back(read_constellation(section, doc.source));
  }
  if (out.empty()) throw Error(ErrorCode::config_error, doc.source + ": no [constellation] section");
  return out;
}

ConfigSection constellation_section(const ConstellationSpec& spec) {
  ConfigSection s{"constellation", 0, {}};
  s.set("name", spec.name);
  s.set("satellites", std::to_string(spec.total_satellites));
  s.set("planes", std::to_string(spec.planes));
  s.set("phasing", std::to_string(spec.phasing));
  s.set("altitude_km", format_number(spec.altitude_m / 1000.0));
  s.set("inclination_deg", format_number(spec.inclination_deg));
  s.set("pattern", spec.pattern == WalkerPattern::delta ? "delta" : "star");
  return s;
}

std::vector<GroundStation> load_stations(const std::filesystem::path& path) {
  const auto doc = load_config(path);
  std::vector<GroundStation> out;
  for (const auto& section : doc.sections) {
    if (section.name != "station")
      throw Error(ErrorCode::config_error,
                  doc.source + ":" + std::to_string(section.line) + ": unknown section [" + section.name + "]");
    SectionReader r(section, doc.source);
    GroundStation gs;
    gs.name = r.text("name");
    gs.location.latitude_deg = r.number("latitude_deg");
    gs.location.longitude_deg = r.number("longitude_deg");
    gs.location.altitude_m = r.number("altitude_m", 0.0);
    if (std::abs(gs.location.latitude_deg) > 90.0) r.fail("latitude_deg", "must lie in [-90, 90]");
    if (gs.location.longitude_deg < -180.0 || gs.location.longitude_deg >= 180.0)
      r.fail("longitude_deg", "must lie in [-180, 180)");
    if (gs.location.altitude_m < -500.0 || gs.location.altitude_m > 9000.0)
      r.fail("altitude_m", "must lie in [-500, 9000]");
    r.finish();
    out.push_back(gs);
  }
  return out;
}

ConfigSection station_section(const GroundStation& station) {
  ConfigSection s{"station", 0, {}};
  s.set("name", station.name);
  s.set("latitude_deg", format_number(station.location.latitude_deg));
  s.set("longitude_deg", format_number(station.location.longitude_deg));
  s.set("altitude_m", format_number(station.location.altitude_m));
  return s;
}

}  // namespace trick
