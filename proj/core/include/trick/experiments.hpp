#pragma once

// End-to-end campaigns: the spoofing demonstration, the residual Monte Carlo
// and secure-triangle coverage. Each run is a pure function of its input
// document and seed; worker threads only change wall-clock time.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trick/attacks.hpp"
#include "trick/config.hpp"
#include "trick/integrity.hpp"
#include "trick/orbits.hpp"
#include "trick/protocol.hpp"
#include "trick/solvers.hpp"

namespace trick {

inline constexpr std::uint64_t kDefaultSeed = 42;

// ---------------------------------------------------------------------------
// Shared geometry

struct SkyConfig {
  ConstellationSpec leo;
  std::vector<ConstellationSpec> gnss;
  double leo_mask_deg = 10.0;
  double gnss_mask_deg = 5.0;
};

struct Sky {
  std::vector<Satellite> leo;
  std::vector<Satellite> gnss;
};

/// LEO ids start at 1000, GNSS constellations at 2000, 3000, ...
Sky build_sky(const SkyConfig& cfg);

/// Positions frozen at one epoch as seen from the UE.
struct Snapshot {
  double epoch_s = 0.0;
  EcefVector ue = EcefVector::Zero();
  std::vector<SatelliteState> leo_anchors;    // highest elevation first
  std::vector<SatelliteState> gnss;           // visible GNSS
  EcefVector second_anchor = EcefVector::Zero();  // triangle anchor paired with leo_anchors[0]
};

/// With anchors == 2 the two highest visible LEOs are used; with 1 the
/// second triangle anchor is the same LEO after anchor_interval_s. Throws
/// DegenerateGeometry when too few satellites are visible.
Snapshot take_snapshot(const Sky& sky, const SkyConfig& cfg, const GeodeticPoint& ue, double epoch_s, int anchors,
                       double anchor_interval_s);

/// Random well-spread geometry: UE on the ellipsoid, LEO anchors at 1200 km
/// and GNSS at 20200 km, each between 20 and 85 deg elevation.
Snapshot synthetic_snapshot(std::uint64_t seed, int gnss_count = 6, int anchors = 2);

struct SessionOptions {
  Seconds processing_delay = 0;
  Seconds ue_clock_bias = 0;
  Seconds gnss_transmit_offset = 0;  // GNSS broadcasts leave this long after the challenge
  double gnss_sigma_m = 0.0;
  double leo_sigma_m = 0.0;
  std::uint64_t seed = kDefaultSeed;
  bool record_events = false;
};

/// One protocol round against every anchor with a shared challenge instant.
struct Session {
  std::vector<ExchangeOutcome> exchanges;
  std::vector<GnssBroadcast> broadcasts;
  std::vector<SumConstraint> sums;  // anchor-major
  std::vector<SignalEvent> events;
};

Session run_session(const Snapshot& snap, const AttackScript& script, const SessionOptions& options);

// ---------------------------------------------------------------------------
// Attack demonstration

struct SchemeScenario {
  GroundStationScheme scheme;
  GeodeticPoint station;
};

struct AttackScenario {
  std::string name = "scenario";
  SkyConfig sky;
  double epoch_s = 0.0;
  GeodeticPoint true_location;
  GeodeticPoint fake_location;
  Seconds backward_delay = 1e-3L;
  Seconds forward_delay = 0;
  double noise_sigma_m = 10.0;
  double leo_noise_sigma_m = 0.0;
  Seconds processing_delay = 0;
  Seconds ue_clock_bias = 0;
  Seconds gnss_transmit_offset = 0;
  int leo_anchors = 2;
  double anchor_interval_s = 60.0;
  double residual_threshold_m = 50.0;
  std::uint64_t seed = kDefaultSeed;
  std::optional<SchemeScenario> scheme;
};

/// Reads [scenario] plus optional [scheme], [constellation] sections and a
/// `constellations = path` include. Throws ConfigError with file:line.
AttackScenario read_attack_scenario(const ConfigDocument& doc);
AttackScenario load_attack_scenario(const std::filesystem::path& path);
/// Self-contained document that reads back to the same scenario.
ConfigDocument attack_scenario_document(const AttackScenario& s);

struct SchemeReport {
  SchemeOutcome outcome;
  SatId station_gnss = 0;
  std::optional<PositionSolution> solution;
  double position_error_m = 0.0;
  SecondCheckResult residual;
};

struct AttackDemoReport {
  AttackScenario scenario;
  Snapshot snapshot;
  SpoofPlan plan;
  std::vector<RangeMeasurement> victim_ranges;
  PositionSolution baseline;
  double baseline_error_to_fake_m = 0.0;
  double baseline_error_to_true_m = 0.0;
  PositionSolution trick;
  double trick_error_to_true_m = 0.0;
  double trick_error_to_fake_m = 0.0;
  IntegrityReport integrity;
  SecondCheckResult residual_at_fake;
  std::optional<SchemeReport> scheme;
  std::vector<SignalEvent> trace;
};

AttackDemoReport run_attack_demo(const AttackScenario& scenario);
nlohmann::ordered_json to_json(const AttackDemoReport& report);

// ---------------------------------------------------------------------------
// Residual Monte Carlo

struct MonteCarloGrid {
  std::vector<double> spoof_offsets_m{25.0, 50.0, 100.0};
  std::vector<double> noise_sigmas_m{50.0, 100.0, 200.0};
  int trials_per_cell = 200;
  std::uint64_t base_seed = kDefaultSeed;

  void validate() const;
};

struct ResidualMcConfig {
  SkyConfig sky;
  double epoch_s = 0.0;
  GeodeticPoint location;
  MonteCarloGrid grid;
  std::optional<Seconds> backward_delay = 1e-3L;  // nullopt: smallest delay keeping the plan feasible
  double leo_noise_sigma_m = 0.0;
  int leo_anchors = 2;
  double anchor_interval_s = 60.0;
  double residual_threshold_m = 50.0;
  bool vertical = false;  // spoof along the local vertical instead of the horizontal circle
};

ResidualMcConfig read_residual_mc(const ConfigDocument& doc);
ResidualMcConfig load_residual_mc(const std::filesystem::path& path);
ConfigDocument residual_mc_document(const ResidualMcConfig& c);

struct ResidualRow {
  double offset_m = 0.0;
  double sigma_m = 0.0;
  int trial = 0;
  double direction_deg = 0.0;
  double backward_delay_s = 0.0;
  double max_residual_m = 0.0;
  double solution_error_m = 0.0;
  bool feasible = false;
  bool converged = false;
  std::string flag;  // empty, or the error that ended the trial
};

/// Rows ordered by (offset, sigma, trial).
std::vector<ResidualRow> run_residual_mc(const ResidualMcConfig& cfg, unsigned threads = 1);

struct CellSummary {
  double offset_m = 0.0;
  double sigma_m = 0.0;
  int trials = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

std::vector<CellSummary> summarize_residuals(const std::vector<ResidualRow>& rows);

// ---------------------------------------------------------------------------
// Coverage

enum class CoverageMode { single_leo_dt, two_leo, vm_three_leo };

std::string to_string(CoverageMode m);
CoverageMode parse_coverage_mode(const std::string& s);  // throws InvalidArgument

struct CoverageRun {
  SkyConfig sky;
  std::vector<GroundStation> stations;
  std::vector<CoverageMode> modes{CoverageMode::single_leo_dt, CoverageMode::two_leo, CoverageMode::vm_three_leo};
  std::vector<double> dt_values_s{0, 30, 60, 120, 180, 240, 300, 450, 600};
  double time_step_s = 60.0;
  double horizon_s = 0.0;  // 0 = one LEO orbital period
  double start_s = 0.0;
  std::uint64_t seed = kDefaultSeed;  // recorded only; coverage is not random

  void validate() const;
  double effective_horizon_s() const;
};

CoverageRun read_coverage(const ConfigDocument& doc);
CoverageRun load_coverage(const std::filesystem::path& path);
ConfigDocument coverage_document(const CoverageRun& run);

struct AvailabilityRow {
  CoverageMode mode = CoverageMode::two_leo;
  std::string station;
  std::optional<double> dt_s;
  int epochs = 0;
  int passing = 0;
  double availability_pct = 0.0;
};

/// Rows ordered by mode (as listed), then dt, then station order.
std::vector<AvailabilityRow> run_coverage(const CoverageRun& run, unsigned threads = 1);

/// Whether at least one anchor set contains the station at epoch t.
bool covered_at(const Sky& sky, const SkyConfig& cfg, const GroundStation& station, CoverageMode mode, double t,
                double dt_s = 0.0);

}  // namespace trick
