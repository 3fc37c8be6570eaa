#include "trick/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "trick/constants.hpp"
#include "trick/errors.hpp"

namespace trick {
namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
// written to index-addressed storage by the caller.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Config helpers

std::vector<ConstellationSpec> collect_constellations(const ConfigDocument& doc, const SectionReader& main) {
  std::vector<ConstellationSpec> specs;
  if (main.has("constellations")) {
    const auto path = resolve_relative(doc.source, main.text("constellations"));
    try {
      for (auto& s : load_constellations(path)) specs.push_back(std::move(s));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::config_error) throw;
      main.fail("constellations", e.what());
    }
  }
  for (const auto* section : doc.all("constellation")) specs.push_back(read_constellation(*section, doc.source));
  return specs;
}

const ConstellationSpec& pick(const std::vector<ConstellationSpec>& specs, const std::string& name,
                              const SectionReader& r, const std::string& key) {
  for (const auto& s : specs)
    if (s.name == name) return s;
  r.fail(key, "no constellation named '" + name + "'");
}

SkyConfig read_sky(const ConfigDocument& doc, const SectionReader& r) {
  const auto specs = collect_constellations(doc, r);
  SkyConfig sky;
  sky.leo = pick(specs, r.text("leo"), r, "leo");
  for (const auto& name : r.texts("gnss")) sky.gnss.push_back(pick(specs, name, r, "gnss"));
  sky.leo_mask_deg = r.number("leo_mask_deg", 10.0);
  sky.gnss_mask_deg = r.number("gnss_mask_deg", 5.0);
  if (!(sky.leo_mask_deg >= 0.0 && sky.leo_mask_deg <= 90.0)) r.fail("leo_mask_deg", "must lie in [0, 90]");
  if (!(sky.gnss_mask_deg >= 0.0 && sky.gnss_mask_deg <= 90.0)) r.fail("gnss_mask_deg", "must lie in [0, 90]");
  return sky;
}

void write_sky(ConfigSection& main, ConfigDocument& doc, const SkyConfig& sky) {
  main.set("leo", sky.leo.name);
  std::string gnss;
  for (const auto& g : sky.gnss) gnss += (gnss.empty() ? "" : ", ") + g.name;
  main.set("gnss", gnss);
  main.set("leo_mask_deg", format_number(sky.leo_mask_deg));
  main.set("gnss_mask_deg", format_number(sky.gnss_mask_deg));
  doc.sections.push_back(constellation_section(sky.leo));
  for (const auto& g : sky.gnss)
    if (g.name != sky.leo.name) doc.sections.push_back(constellation_section(g));
}

GeodeticPoint read_point(const SectionReader& r, const std::string& prefix) {
  GeodeticPoint p;
  const std::string lat = prefix + "latitude_deg", lon = prefix + "longitude_deg", alt = prefix + "altitude_m";
  p.latitude_deg = r.number(lat);
  p.longitude_deg = r.number(lon);
  p.altitude_m = r.number(alt, 0.0);
  if (!(std::abs(p.latitude_deg) <= 90.0)) r.fail(lat, "must lie in [-90, 90]");
  if (!(p.longitude_deg >= -180.0 && p.longitude_deg < 180.0)) r.fail(lon, "must lie in [-180, 180)");
  if (!(p.altitude_m >= -500.0 && p.altitude_m <= 9000.0)) r.fail(alt, "must lie in [-500, 9000]");
  return p;
}

void write_point(ConfigSection& s, const std::string& prefix, const GeodeticPoint& p) {
  s.set(prefix + "latitude_deg", format_number(p.latitude_deg));
  s.set(prefix + "longitude_deg", format_number(p.longitude_deg));
  s.set(prefix + "altitude_m", format_number(p.altitude_m));
}

Seconds read_seconds(const SectionReader& r, const std::string& key, double fallback, bool allow_negative = false) {
  const double v = r.number(key, fallback);
  if (!std::isfinite(v) || (!allow_negative && v < 0.0)) r.fail(key, "must be a finite non-negative duration");
  return static_cast<Seconds>(v);
}

std::string sec(Seconds s) { return format_number(static_cast<double>(s)); }

int read_anchors(const SectionReader& r) {
  const auto n = r.integer("leo_anchors", 2);
  if (n != 1 && n != 2) r.fail("leo_anchors", "must be 1 or 2");
  return static_cast<int>(n);
}

const ConfigSection& require_section(const ConfigDocument& doc, const std::string& name) {
  const ConfigSection* s = doc.find(name);
  if (!s) throw Error(ErrorCode::config_error, doc.source + ": missing [" + name + "] section");
  if (doc.all(name).size() > 1)
    throw Error(ErrorCode::config_error, doc.source + ":" + std::to_string(doc.all(name)[1]->line) +
                                             ": duplicate [" + name + "] section");
  return *s;
}

void reject_unknown_sections(const ConfigDocument& doc, std::initializer_list<std::string_view> allowed) {
  for (const auto& s : doc.sections) {
    if (std::find(allowed.begin(), allowed.end(), s.name) == allowed.end())
      throw Error(ErrorCode::config_error,
                  doc.source + ":" + std::to_string(s.line) + ": unknown section [" + s.name + "]");
  }
}

nlohmann::ordered_json point_json(const EcefVector& v) {
  const GeodeticPoint g = ecef_to_geodetic(v);
  return {{"latitude_deg", g.latitude_deg},
          {"longitude_deg", g.longitude_deg},
          {"altitude_m", g.altitude_m},
          {"ecef_m", {v.x(), v.y(), v.z()}}};
}

nlohmann::ordered_json subsat_json(SatId id, const EcefVector& v) {
  const GeodeticPoint g = ecef_to_geodetic(subsatellite_point(v) * kEarthMeanRadius);
  return {{"id", id},
          {"ecef_m", {v.x(), v.y(), v.z()}},
          {"subsatellite_latitude_deg", g.latitude_deg},
          {"subsatellite_longitude_deg", g.longitude_deg}};
}

nlohmann::ordered_json solution_json(const PositionSolution& s) {
  nlohmann::ordered_json j = point_json(s.position);
  j["converged"] = s.converged;
  j["iterations"] = s.iterations;
  j["max_abs_residual_m"] = s.max_abs_residual();
  return j;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * frac;
}

}  // namespace

// ---------------------------------------------------------------------------
// Geometry

Sky build_sky(const SkyConfig& cfg) {
  Sky sky;
  sky.leo = build_constellation(cfg.leo, 1000);
  SatId base = 2000;
  for (const auto& g : cfg.gnss) {
    auto sats = build_constellation(g, base);
    sky.gnss.insert(sky.gnss.end(), sats.begin(), sats.end());
    base += 1000;
  }
  return sky;
}

Snapshot take_snapshot(const Sky& sky, const SkyConfig& cfg, const GeodeticPoint& ue, double epoch_s, int anchors,
                       double anchor_interval_s) {
  if (anchors != 1 && anchors != 2) throw Error(ErrorCode::invalid_argument, "anchor count must be 1 or 2");
  Snapshot snap;
  snap.epoch_s = epoch_s;
  snap.ue = geodetic_to_ecef(ue);
  auto leos = visible_satellites(snap.ue, sky.leo, epoch_s, cfg.leo_mask_deg);
  std::stable_sort(leos.begin(), leos.end(), [&](const SatelliteState& a, const SatelliteState& b) {
    return elevation_angle(snap.ue, a.position) > elevation_angle(snap.ue, b.position);
  });
  if (static_cast<int>(leos.size()) < anchors)
    throw Error(ErrorCode::degenerate_geometry, "only " + std::to_string(leos.size()) + " LEO satellites visible");
  snap.leo_anchors.assign(leos.begin(), leos.begin() + anchors);
  if (anchors == 2) {
    snap.second_anchor = snap.leo_anchors[1].position;
  } else {
    const auto it = std::find_if(sky.leo.begin(), sky.leo.end(),
                                 [&](const Satellite& s) { return s.id == snap.leo_anchors[0].id; });
    snap.second_anchor = propagate(it->elements, epoch_s + anchor_interval_s);
  }
  snap.gnss = visible_satellites(snap.ue, sky.gnss, epoch_s, cfg.gnss_mask_deg);
  return snap;
}

Snapshot synthetic_snapshot(std::uint64_t seed, int gnss_count, int anchors) {
  if (gnss_count < 1 || anchors < 1 || anchors > 2)
    throw Error(ErrorCode::invalid_argument, "synthetic geometry needs >= 1 GNSS and 1-2 anchors");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GeodeticPoint ue{-70.0 + 140.0 * unit(rng), -180.0 + 360.0 * unit(rng), 500.0 * unit(rng)};
  const Eigen::Matrix3d enu = enu_basis(ue);
  Snapshot snap;
  snap.ue = geodetic_to_ecef(ue);
  auto place = [&](double altitude_m, double azimuth_deg, double elevation_deg) {
    const double az = azimuth_deg * kDegToRad, el = elevation_deg * kDegToRad;
    const EcefVector dir = enu.col(0) * (std::cos(el) * std::sin(az)) + enu.col(1) * (std::cos(el) * std::cos(az)) +
                           enu.col(2) * std::sin(el);
    // Range along dir to the shell of radius |ue| + altitude.
    const double r0 = snap.ue.norm(), rs = r0 + altitude_m;
    const double b = snap.ue.dot(dir);
    return EcefVector(snap.ue + dir * (-b + std::sqrt(b * b - r0 * r0 + rs * rs)));
  };
  const double leo_az = 360.0 * unit(rng);
  for (int k = 0; k < anchors; ++k)
    snap.leo_anchors.push_back({1000 + k, place(1.2e6, leo_az + 150.0 * k + 30.0 * unit(rng), 30.0 + 55.0 * unit(rng))});
  snap.second_anchor = anchors == 2 ? snap.leo_anchors[1].position
                                    : place(1.2e6, leo_az + 90.0 + 60.0 * unit(rng), 30.0 + 55.0 * unit(rng));
  const double gnss_az = 360.0 * unit(rng);
  for (int i = 0; i < gnss_count; ++i) {
    const double az = gnss_az + 360.0 * i / gnss_count + 20.0 * (unit(rng) - 0.5);
    snap.gnss.push_back({2000 + i, place(2.02e7, az, 20.0 + 65.0 * unit(rng))});
  }
  return snap;
}

Session run_session(const Snapshot& snap, const AttackScript& script, const SessionOptions& options) {
  const Seconds t0 = static_cast<Seconds>(snap.epoch_s);
  ClockModel ue_clock{ClockId::ue, options.ue_clock_bias, 0.0, t0};
  ClockModel leo_clock{ClockId::leo, 0, 0.0, t0};
  NoiseStream gnss_noise(NoiseModel{options.gnss_sigma_m, derive_seed(options.seed, 1)});
  NoiseStream leo_noise(NoiseModel{options.leo_sigma_m, derive_seed(options.seed, 2)});

  Session session;
  LinkOptions link{options.processing_delay, &leo_noise};
  for (const auto& leo : snap.leo_anchors) {
    auto outcome = run_exchange(snap.ue, leo, ue_clock, leo_clock, script, t0, link);
    if (options.record_events)
      session.events.insert(session.events.end(), outcome.events.begin(), outcome.events.end());
    session.exchanges.push_back(std::move(outcome));
  }
  const auto plans = schedule_broadcasts(snap.gnss, t0 + options.gnss_transmit_offset);
  session.broadcasts =
      receive_broadcasts(snap.ue, ue_clock, plans, script, gnss_noise, options.record_events ? &session.events : nullptr);
  for (const auto& ex : session.exchanges) {
    auto sums = form_sums(ex.exchange, ex.response, session.broadcasts);
    session.sums.insert(session.sums.end(), sums.begin(), sums.end());
  }
  return session;
}

// ---------------------------------------------------------------------------
// Attack demonstration

AttackScenario read_attack_scenario(const ConfigDocument& doc) {
  reject_unknown_sections(doc, {"scenario", "scheme", "constellation"});
  SectionReader r(require_section(doc, "scenario"), doc.source);
  AttackScenario s;
  s.name = r.text("name", "scenario");
  s.sky = read_sky(doc, r);
  s.epoch_s = r.number("epoch_s", 0.0);
  s.true_location = read_point(r, "true_");
  s.fake_location = read_point(r, "fake_");
  s.backward_delay = read_seconds(r, "backward_delay_s", 1e-3);
  s.forward_delay = read_seconds(r, "forward_delay_s", 0.0);
  s.noise_sigma_m = r.number("noise_sigma_m", 10.0);
  s.leo_noise_sigma_m = r.number("leo_noise_sigma_m", 0.0);
  if (!(s.noise_sigma_m >= 0.0)) r.fail("noise_sigma_m", "must be >= 0");
  if (!(s.leo_noise_sigma_m >= 0.0)) r.fail("leo_noise_sigma_m", "must be >= 0");
  s.processing_delay = read_seconds(r, "processing_delay_s", 0.0);
  s.ue_clock_bias = read_seconds(r, "ue_clock_bias_s", 0.0, true);
  s.gnss_transmit_offset = read_seconds(r, "gnss_transmit_offset_s", 0.0);
  s.leo_anchors = read_anchors(r);
  s.anchor_interval_s = r.number("anchor_interval_s", 60.0);
  s.residual_threshold_m = r.number("residual_threshold_m", 50.0);
  if (!(s.residual_threshold_m > 0.0)) r.fail("residual_threshold_m", "must be > 0");
  s.seed = r.unsigned_integer("seed", kDefaultSeed);
  r.finish();

  if (const ConfigSection* sec_scheme = doc.find("scheme")) {
    SectionReader k(*sec_scheme, doc.source);
    SchemeScenario sc;
    const std::string variant = k.text("variant");
    if (variant == "a" || variant == "A") sc.scheme.variant = SchemeVariant::a;
    else if (variant == "b" || variant == "B") sc.scheme.variant = SchemeVariant::b;
    else k.fail("variant", "expected A or B, got '" + variant + "'");
    sc.station = read_point(k, "");
    sc.scheme.wait_time = read_seconds(k, "wait_time_s", 1e-3);
    sc.scheme.processing = read_seconds(k, "processing_s", 0.0);
    sc.scheme.correction = read_seconds(k, "correction_s", 0.0);
    sc.scheme.gnss_spoof_delay = read_seconds(k, "gnss_spoof_delay_s", 0.0);
    k.finish();
    s.scheme = sc;
  }
  return s;
}

AttackScenario load_attack_scenario(const std::filesystem::path& path) {
  return read_attack_scenario(load_config(path));
}

ConfigDocument attack_scenario_document(const AttackScenario& s) {
  ConfigDocument doc;
  doc.source = "manifest";
  doc.sections.push_back({"scenario", 0, {}});
  {
    ConfigSection main{"scenario", 0, {}};
    main.set("name", s.name);
    write_sky(main, doc, s.sky);
    main.set("epoch_s", format_number(s.epoch_s));
    write_point(main, "true_", s.true_location);
    write_point(main, "fake_", s.fake_location);
    main.set("backward_delay_s", sec(s.backward_delay));
    main.set("forward_delay_s", sec(s.forward_delay));
    main.set("noise_sigma_m", format_number(s.noise_sigma_m));
    main.set("leo_noise_sigma_m", format_number(s.leo_noise_sigma_m));
    main.set("processing_delay_s", sec(s.processing_delay));
    main.set("ue_clock_bias_s", sec(s.ue_clock_bias));
    main.set("gnss_transmit_offset_s", sec(s.gnss_transmit_offset));
    main.set("leo_anchors", std::to_string(s.leo_anchors));
    main.set("anchor_interval_s", format_number(s.anchor_interval_s));
    main.set("residual_threshold_m", format_number(s.residual_threshold_m));
    main.set("seed", std::to_string(s.seed));
    doc.sections.front() = main;
  }
  if (s.scheme) {
    ConfigSection k{"scheme", 0, {}};
    k.set("variant", s.scheme->scheme.variant == SchemeVariant::a ? "A" : "B");
    write_point(k, "", s.scheme->station);
    k.set("wait_time_s", sec(s.scheme->scheme.wait_time));
    k.set("processing_s", sec(s.scheme->scheme.processing));
    k.set("correction_s", sec(s.scheme->scheme.correction));
    k.set("gnss_spoof_delay_s", sec(s.scheme->scheme.gnss_spoof_delay));
    doc.sections.push_back(k);
  }
  return doc;
}

AttackDemoReport run_attack_demo(const AttackScenario& scenario) {
  AttackDemoReport rep;
  rep.scenario = scenario;
  const Sky sky = build_sky(scenario.sky);
  rep.snapshot = take_snapshot(sky, scenario.sky, scenario.true_location, scenario.epoch_s, scenario.leo_anchors,
                               scenario.anchor_interval_s);
  const Snapshot& snap = rep.snapshot;
  const EcefVector fake = geodetic_to_ecef(scenario.fake_location);

  rep.plan = plan_spoof(snap.ue, fake, snap.gnss, scenario.backward_delay);
  AttackScript script = rep.plan.script();
  script.forward_delay = scenario.forward_delay;

  SessionOptions opt;
  opt.processing_delay = scenario.processing_delay;
  opt.ue_clock_bias = scenario.ue_clock_bias;
  opt.gnss_transmit_offset = scenario.gnss_transmit_offset;
  opt.gnss_sigma_m = scenario.noise_sigma_m;
  opt.leo_sigma_m = scenario.leo_noise_sigma_m;
  opt.seed = scenario.seed;
  opt.record_events = true;
  const Session session = run_session(snap, script, opt);
  rep.trace = session.events;

  SolverConfig cfg;
  cfg.throw_on_nonconvergence = false;

  const auto& primary = session.exchanges.front();
  rep.victim_ranges = victim_pseudoranges(primary.exchange, primary.response, session.broadcasts);
  rep.baseline = spherical_multilaterate(rep.victim_ranges, cfg);
  rep.baseline_error_to_fake_m = (rep.baseline.position - fake).norm();
  rep.baseline_error_to_true_m = (rep.baseline.position - snap.ue).norm();

  rep.trick = ellipsoidal_multilaterate(session.sums, cfg);
  rep.trick_error_to_true_m = (rep.trick.position - snap.ue).norm();
  rep.trick_error_to_fake_m = (rep.trick.position - fake).norm();

  const ResidualPolicy policy{scenario.residual_threshold_m};
  rep.integrity.triangle = first_check(rep.trick.position, snap.leo_anchors[0].position, snap.second_anchor, snap.gnss);
  rep.integrity.residual = second_check(rep.trick.position, session.sums, policy);
  rep.integrity.clock = clock_check(primary.exchange, rep.trick.position, primary.response.sat_position,
                                    default_clock_tolerance(scenario.leo_noise_sigma_m));
  rep.residual_at_fake = second_check(fake, session.sums, policy);

  if (scenario.scheme) {
    SchemeReport sr;
    const EcefVector station = geodetic_to_ecef(scenario.scheme->station);
    auto seen = visible_satellites(station, sky.gnss, scenario.epoch_s, scenario.sky.gnss_mask_deg);
    if (seen.empty()) throw Error(ErrorCode::degenerate_geometry, "no GNSS satellite visible from the ground station");
    const auto best = std::max_element(seen.begin(), seen.end(), [&](const auto& a, const auto& b) {
      return elevation_angle(station, a.position) < elevation_angle(station, b.position);
    });
    SchemeGeometry geo{snap.ue, station, *best, snap.gnss};
    SchemeClocks clocks;
    clocks.ue.bias = scenario.ue_clock_bias;
    sr.station_gnss = best->id;
    sr.outcome = run_scheme(scenario.scheme->scheme, geo, clocks, static_cast<Seconds>(scenario.epoch_s));
    try {
      sr.solution = ellipsoidal_multilaterate(sr.outcome.constraints, cfg);
      sr.position_error_m = (sr.solution->position - snap.ue).norm();
      sr.residual = second_check(sr.solution->position, sr.outcome.constraints, policy);
    } catch (const Error&) {
      sr.solution.reset();
    }
    rep.scheme = sr;
  }
  return rep;
}

nlohmann::ordered_json to_json(const AttackDemoReport& rep) {
  using json = nlohmann::ordered_json;
  const auto& s = rep.scenario;
  const auto& snap = rep.snapshot;
  json j;
  j["scenario"] = s.name;
  j["seed"] = s.seed;
  j["epoch_s"] = s.epoch_s;
  j["backward_delay_s"] = static_cast<double>(s.backward_delay);
  j["forward_delay_s"] = static_cast<double>(s.forward_delay);
  j["noise_sigma_m"] = s.noise_sigma_m;
  j["true_position"] = point_json(snap.ue);
  j["fake_target"] = point_json(rep.plan.fake_position);

  j["leo_anchors"] = json::array();
  for (const auto& a : snap.leo_anchors) {
    auto e = subsat_json(a.id, a.position);
    e["elevation_deg"] = elevation_angle(snap.ue, a.position);
    j["leo_anchors"].push_back(e);
  }
  j["second_triangle_anchor"] = subsat_json(snap.leo_anchors.size() > 1 ? snap.leo_anchors[1].id
                                                                         : snap.leo_anchors[0].id,
                                            snap.second_anchor);
  j["gnss"] = json::array();
  for (const auto& g : snap.gnss) {
    auto e = subsat_json(g.id, g.position);
    e["elevation_deg"] = elevation_angle(snap.ue, g.position);
    e["spoof_delay_s"] = static_cast<double>(rep.plan.gnss_delays.at(g.id));
    j["gnss"].push_back(e);
  }

  j["plan"] = {{"feasible", rep.plan.feasible},
               {"min_gnss_delay_s", rep.plan.gnss_delays.empty() ? 0.0 : static_cast<double>(rep.plan.min_delay())}};

  auto baseline = solution_json(rep.baseline);
  baseline["error_to_fake_m"] = rep.baseline_error_to_fake_m;
  baseline["error_to_true_m"] = rep.baseline_error_to_true_m;
  j["baseline"] = baseline;

  auto trick = solution_json(rep.trick);
  trick["error_to_true_m"] = rep.trick_error_to_true_m;
  trick["error_to_fake_m"] = rep.trick_error_to_fake_m;
  j["trick"] = trick;
  j["integrity"] = to_json(rep.integrity);
  j["residual_at_fake"] = {{"pass", rep.residual_at_fake.pass}, {"max_residual_m", rep.residual_at_fake.max_residual_m}};

  if (rep.scheme) {
    const auto& sr = *rep.scheme;
    const auto& sc = *s.scheme;
    json k;
    k["variant"] = sc.scheme.variant == SchemeVariant::a ? "A" : "B";
    k["station"] = point_json(geodetic_to_ecef(sc.station));
    k["station_gnss"] = sr.station_gnss;
    k["gnss_spoof_delay_s"] = static_cast<double>(sc.scheme.gnss_spoof_delay);
    k["reported_wait_s"] = static_cast<double>(sr.outcome.reported_wait);
    k["reported_processing_s"] = static_cast<double>(sr.outcome.reported_processing);
    k["sum_error_m"] = sr.outcome.sum_error_m;
    if (sr.solution) {
      k["solution"] = solution_json(*sr.solution);
      k["position_error_m"] = sr.position_error_m;
      k["residual_pass"] = sr.residual.pass;
      k["max_residual_m"] = sr.residual.max_residual_m;
    } else {
      k["solution"] = nullptr;
    }
    k["spoofed"] = sr.outcome.sum_error_m != 0.0;
    j["scheme"] = k;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Residual Monte Carlo

void MonteCarloGrid::validate() const {
  if (trials_per_cell < 1) throw Error(ErrorCode::invalid_argument, "trials_per_cell must be >= 1");
  for (double o : spoof_offsets_m)
    if (!(o >= 0.0)) throw Error(ErrorCode::invalid_argument, "spoof offsets must be >= 0");
  for (double s : noise_sigmas_m)
    if (!(s >= 0.0)) throw Error(ErrorCode::invalid_argument, "noise sigmas must be >= 0");
}

ResidualMcConfig read_residual_mc(const ConfigDocument& doc) {
  reject_unknown_sections(doc, {"residual_mc", "constellation"});
  SectionReader r(require_section(doc, "residual_mc"), doc.source);
  ResidualMcConfig c;
  c.sky = read_sky(doc, r);
  c.epoch_s = r.number("epoch_s", 0.0);
  c.location = read_point(r, "");
  c.grid.spoof_offsets_m = r.numbers("offsets_m", c.grid.spoof_offsets_m);
  c.grid.noise_sigmas_m = r.numbers("sigmas_m", c.grid.noise_sigmas_m);
  const auto trials = r.integer("trials", c.grid.trials_per_cell);
  if (trials < 1 || trials > 1000000) r.fail("trials", "must lie in [1, 1000000]");
  c.grid.trials_per_cell = static_cast<int>(trials);
  c.grid.base_seed = r.unsigned_integer("seed", kDefaultSeed);
  for (double o : c.grid.spoof_offsets_m)
    if (!(o >= 0.0)) r.fail("offsets_m", "offsets must be >= 0");
  for (double s : c.grid.noise_sigmas_m)
    if (!(s >= 0.0)) r.fail("sigmas_m", "sigmas must be >= 0");
  if (r.has("backward_delay_s") && r.text("backward_delay_s") == "auto") c.backward_delay.reset();
  else c.backward_delay = read_seconds(r, "backward_delay_s", 1e-3);
  c.leo_noise_sigma_m = r.number("leo_noise_sigma_m", 0.0);
  if (!(c.leo_noise_sigma_m >= 0.0)) r.fail("leo_noise_sigma_m", "must be >= 0");
  c.leo_anchors = read_anchors(r);
  c.anchor_interval_s = r.number("anchor_interval_s", 60.0);
  c.residual_threshold_m = r.number("residual_threshold_m", 50.0);
  if (!(c.residual_threshold_m > 0.0)) r.fail("residual_threshold_m", "must be > 0");
  c.vertical = r.boolean("vertical", false);
  r.finish();
  return c;
}

ResidualMcConfig load_residual_mc(const std::filesystem::path& path) { return read_residual_mc(load_config(path)); }

ConfigDocument residual_mc_document(const ResidualMcConfig& c) {
  ConfigDocument doc;
  doc.source = "manifest";
  doc.sections.push_back({"residual_mc", 0, {}});
  ConfigSection main{"residual_mc", 0, {}};
  write_sky(main, doc, c.sky);
  main.set("epoch_s", format_number(c.epoch_s));
  write_point(main, "", c.location);
  auto list = [](const std::vector<double>& v) {
    std::string out;
    for (double x : v) out += (out.empty() ? "" : ", ") + format_number(x);
    return out;
  };
  main.set("offsets_m", list(c.grid.spoof_offsets_m));
  main.set("sigmas_m", list(c.grid.noise_sigmas_m));
  main.set("trials", std::to_string(c.grid.trials_per_cell));
  main.set("seed", std::to_string(c.grid.base_seed));
  main.set("backward_delay_s", c.backward_delay ? sec(*c.backward_delay) : std::string("auto"));
  main.set("leo_noise_sigma_m", format_number(c.leo_noise_sigma_m));
  main.set("leo_anchors", std::to_string(c.leo_anchors));
  main.set("anchor_interval_s", format_number(c.anchor_interval_s));
  main.set("residual_threshold_m", format_number(c.residual_threshold_m));
  main.set("vertical", c.vertical ? "true" : "false");
  doc.sections.front() = main;
  return doc;
}

std::vector<ResidualRow> run_residual_mc(const ResidualMcConfig& cfg, unsigned threads) {
  cfg.grid.validate();
  const Sky sky = build_sky(cfg.sky);
  const Snapshot snap =
      take_snapshot(sky, cfg.sky, cfg.location, cfg.epoch_s, cfg.leo_anchors, cfg.anchor_interval_s);
  const Eigen::Matrix3d enu = enu_basis(cfg.location);
  const ResidualPolicy policy{cfg.residual_threshold_m};

  const auto n_offsets = cfg.grid.spoof_offsets_m.size();
  const auto n_sigmas = cfg.grid.noise_sigmas_m.size();
  const auto trials = static_cast<std::size_t>(cfg.grid.trials_per_cell);
  std::vector<ResidualRow> rows(n_offsets * n_sigmas * trials);

  parallel_for(rows.size(), threads, [&](std::size_t index) {
    const std::size_t cell = index / trials;
    const int trial = static_cast<int>(index % trials);
    ResidualRow& row = rows[index];
    row.offset_m = cfg.grid.spoof_offsets_m[cell / n_sigmas];
    row.sigma_m = cfg.grid.noise_sigmas_m[cell % n_sigmas];
    row.trial = trial;

    const std::uint64_t seed = derive_seed(cfg.grid.base_seed, cell, static_cast<std::uint64_t>(trial));
    std::mt19937_64 rng(seed);
    row.direction_deg = std::uniform_real_distribution<double>(0.0, 360.0)(rng);
    const double a = row.direction_deg * kDegToRad;
    const EcefVector dir = cfg.vertical ? EcefVector(enu.col(2) * (row.direction_deg < 180.0 ? 1.0 : -1.0))
                                        : EcefVector(enu.col(0) * std::cos(a) + enu.col(1) * std::sin(a));
    const EcefVector fake = snap.ue + row.offset_m * dir;

    Seconds backward = 0;
    if (cfg.backward_delay) {
      backward = *cfg.backward_delay;
    } else {
      const SpoofPlan probe = plan_spoof(snap.ue, fake, snap.gnss, 0);
      if (!probe.gnss_delays.empty()) backward = std::max<Seconds>(0, -2 * probe.min_delay());
    }
    row.backward_delay_s = static_cast<double>(backward);
    const SpoofPlan plan = plan_spoof(snap.ue, fake, snap.gnss, backward);
    row.feasible = plan.feasible;
    SessionOptions opt;
    opt.gnss_sigma_m = row.sigma_m;
    opt.leo_sigma_m = cfg.leo_noise_sigma_m;
    opt.seed = seed;
    try {
      const Session session = run_session(snap, plan.script(), opt);
      SolverConfig sc;
      sc.throw_on_nonconvergence = false;
      const PositionSolution sol = ellipsoidal_multilaterate(session.sums, sc);
      row.converged = sol.converged;
      if (!sol.converged) row.flag = std::string(to_string(ErrorCode::non_convergence));
      row.solution_error_m = (sol.position - snap.ue).norm();
      row.max_residual_m = second_check(sol.position, session.sums, policy).max_residual_m;
    } catch (const Error& e) {
      row.flag = std::string(to_string(e.code()));
      row.max_residual_m = std::nan("");
      row.solution_error_m = std::nan("");
    }
  });
  return rows;
}

std::vector<CellSummary> summarize_residuals(const std::vector<ResidualRow>& rows) {
  std::vector<CellSummary> out;
  std::vector<double> values;
  auto flush = [&] {
    if (out.empty()) return;
    auto& c = out.back();
    c.trials = static_cast<int>(values.size());
    if (!values.empty()) {
      c.min = *std::min_element(values.begin(), values.end());
      c.max = *std::max_element(values.begin(), values.end());
      c.q1 = quantile(values, 0.25);
      c.median = quantile(values, 0.5);
      c.q3 = quantile(values, 0.75);
    }
    values.clear();
  };
  for (const auto& r : rows) {
    if (out.empty() || out.back().offset_m != r.offset_m || out.back().sigma_m != r.sigma_m) {
      flush();
      out.push_back({r.offset_m, r.sigma_m});
    }
    if (r.flag.empty() && std::isfinite(r.max_residual_m)) values.push_back(r.max_residual_m);
  }
  flush();
  return out;
}

// ---------------------------------------------------------------------------
// Coverage

std::string to_string(CoverageMode m) {
  switch (m) {
    case CoverageMode::single_leo_dt: return "single-leo-dt";
    case CoverageMode::two_leo: return "two-leo";
    case CoverageMode::vm_three_leo: return "vm-three-leo";
  }
  return "unknown";
}

CoverageMode parse_coverage_mode(const std::string& s) {
  for (auto m : {CoverageMode::single_leo_dt, CoverageMode::two_leo, CoverageMode::vm_three_leo})
    if (to_string(m) == s) return m;
  throw Error(ErrorCode::invalid_argument, "unknown coverage mode '" + s + "'");
}

void CoverageRun::validate() const {
  if (!(time_step_s > 0.0)) throw Error(ErrorCode::invalid_argument, "time step must be positive");
  if (!(horizon_s >= 0.0)) throw Error(ErrorCode::invalid_argument, "horizon must be >= 0");
  if (modes.empty()) throw Error(ErrorCode::invalid_argument, "no coverage mode selected");
  const bool sweep = std::find(modes.begin(), modes.end(), CoverageMode::single_leo_dt) != modes.end();
  if (sweep && dt_values_s.empty()) throw Error(ErrorCode::invalid_argument, "single-leo-dt needs dt values");
  for (double dt : dt_values_s)
    if (!(dt >= 0.0)) throw Error(ErrorCode::invalid_argument, "dt values must be >= 0");
}

double CoverageRun::effective_horizon_s() const {
  return horizon_s > 0.0 ? horizon_s : orbital_period(sky.leo.semi_major_axis_m());
}

CoverageRun read_coverage(const ConfigDocument& doc) {
  reject_unknown_sections(doc, {"coverage", "constellation", "station"});
  SectionReader r(require_section(doc, "coverage"), doc.source);
  CoverageRun run;
  run.sky = read_sky(doc, r);
  if (r.has("stations")) {
    const auto path = resolve_relative(doc.source, r.text("stations"));
    try {
      run.stations = load_stations(path);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::config_error) throw;
      r.fail("stations", e.what());
    }
  }
  if (!doc.all("station").empty()) {
    ConfigDocument inline_doc;
    inline_doc.source = doc.source;
    for (const auto* s : doc.all("station")) inline_doc.sections.push_back(*s);
    // Reuse the file loader's validation on the inline sections.
    for (const auto& s : inline_doc.sections) {
      SectionReader k(s, doc.source);
      GroundStation gs;
      gs.name = k.text("name");
      gs.location = read_point(k, "");
      k.finish();
      run.stations.push_back(gs);
    }
  }
  if (run.stations.empty()) r.fail("stations", "no ground stations configured");
  if (r.has("modes")) {
    run.modes.clear();
    for (const auto& m : r.texts("modes")) {
      try {
        run.modes.push_back(parse_coverage_mode(m));
      } catch (const Error& e) {
        r.fail("modes", e.what());
      }
    }
  }
  run.dt_values_s = r.numbers("dt_values_s", run.dt_values_s);
  run.time_step_s = r.number("time_step_s", run.time_step_s);
  run.horizon_s = r.number("horizon_s", run.horizon_s);
  run.start_s = r.number("start_s", run.start_s);
  run.seed = r.unsigned_integer("seed", kDefaultSeed);
  r.finish();
  try {
    run.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::config_error, doc.source + ": " + e.what());
  }
  return run;
}

CoverageRun load_coverage(const std::filesystem::path& path) { return read_coverage(load_config(path)); }

ConfigDocument coverage_document(const CoverageRun& run) {
  ConfigDocument doc;
  doc.source = "manifest";
  doc.sections.push_back({"coverage", 0, {}});
  ConfigSection main{"coverage", 0, {}};
  write_sky(main, doc, run.sky);
  std::string modes;
  for (auto m : run.modes) modes += (modes.empty() ? "" : ", ") + to_string(m);
  main.set("modes", modes);
  std::string dts;
  for (double dt : run.dt_values_s) dts += (dts.empty() ? "" : ", ") + format_number(dt);
  main.set("dt_values_s", dts);
  main.set("time_step_s", format_number(run.time_step_s));
  main.set("horizon_s", format_number(run.horizon_s));
  main.set("start_s", format_number(run.start_s));
  main.set("seed", std::to_string(run.seed));
  doc.sections.front() = main;
  for (const auto& gs : run.stations) doc.sections.push_back(station_section(gs));
  return doc;
}

bool covered_at(const Sky& sky, const SkyConfig& cfg, const GroundStation& station, CoverageMode mode, double t,
                double dt_s) {
  const EcefVector p = geodetic_to_ecef(station.location);
  const auto leos = visible_satellites(p, sky.leo, t, cfg.leo_mask_deg);
  if (mode == CoverageMode::vm_three_leo) {
    const UnitVector q = subsatellite_point(p);
    for (std::size_t i = 0; i < leos.size(); ++i) {
      const UnitVector a = subsatellite_point(leos[i].position);
      for (std::size_t j = i + 1; j < leos.size(); ++j) {
        const UnitVector b = subsatellite_point(leos[j].position);
        for (std::size_t k = j + 1; k < leos.size(); ++k) {
          const SphericalTriangle tri{a, b, subsatellite_point(leos[k].position)};
          if (solid_angle(tri) >= kDegenerateSolidAngle && point_in_spherical_triangle(q, tri)) return true;
        }
      }
    }
    return false;
  }
  const auto gnss = visible_satellites(p, sky.gnss, t, cfg.gnss_mask_deg);
  if (gnss.empty()) return false;
  if (mode == CoverageMode::two_leo) {
    for (std::size_t i = 0; i < leos.size(); ++i)
      for (std::size_t j = i + 1; j < leos.size(); ++j)
        if (first_check(p, leos[i].position, leos[j].position, gnss).pass) return true;
    return false;
  }
  for (const auto& leo : leos) {
    const auto it = std::find_if(sky.leo.begin(), sky.leo.end(), [&](const Satellite& s) { return s.id == leo.id; });
    const EcefVector later = propagate(it->elements, t + dt_s);
    if (elevation_angle(p, later) < cfg.leo_mask_deg) continue;
    if (first_check(p, leo.position, later, gnss).pass) return true;
  }
  return false;
}

std::vector<AvailabilityRow> run_coverage(const CoverageRun& run, unsigned threads) {
  run.validate();
  const Sky sky = build_sky(run.sky);
  const double horizon = run.effective_horizon_s();
  const int epochs = static_cast<int>(std::floor(horizon / run.time_step_s + 1e-9));

  std::vector<AvailabilityRow> rows;
  std::vector<std::size_t> station_of;
  for (auto mode : run.modes) {
    if (mode == CoverageMode::single_leo_dt) {
      for (double dt : run.dt_values_s)
        for (std::size_t i = 0; i < run.stations.size(); ++i) {
          rows.push_back({mode, run.stations[i].name, dt, epochs, 0, 0.0});
          station_of.push_back(i);
        }
    } else {
      for (std::size_t i = 0; i < run.stations.size(); ++i) {
        rows.push_back({mode, run.stations[i].name, std::nullopt, epochs, 0, 0.0});
        station_of.push_back(i);
      }
    }
  }

  parallel_for(rows.size(), threads, [&](std::size_t index) {
    AvailabilityRow& row = rows[index];
    const GroundStation& station = run.stations[station_of[index]];
    int passing = 0;
    for (int k = 0; k < epochs; ++k) {
      const double t = run.start_s + k * run.time_step_s;
      if (covered_at(sky, run.sky, station, row.mode, t, row.dt_s.value_or(0.0))) ++passing;
    }
    row.passing = passing;
    row.availability_pct = epochs > 0 ? 100.0 * passing / epochs : 0.0;
  });
  return rows;
}

}  // namespace trick
