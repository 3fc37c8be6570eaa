#pragma once

// The insecure baseline receiver, the selective-delay spoof planner, and
// the two ground-station reference schemes whose GNSS-derived timing can be
// pushed by a delayed GNSS feed.

#include <map>
#include <span>
#include <vector>

#include "trick/channel.hpp"
#include "trick/protocol.hpp"
#include "trick/solvers.hpp"

namespace trick {

/// Clock-corrected one-way ranges. The UE maps the LEO transmit instant onto
/// its own clock with the two-way offset estimate, then
///   range_i = c * (arrival_i - (t_leo_tx - offset) + (t_leo_tx - t_gnss_i)).
/// Throws UnauthenticatedResponse.
std::vector<RangeMeasurement> victim_pseudoranges(const RangingExchange& x, const LeoResponse& resp,
                                                  std::span<const GnssBroadcast> broadcasts);

struct SpoofPlan {
  GeodeticPoint fake_target;
  EcefVector fake_position = EcefVector::Zero();
  Seconds backward_delay = 0;
  std::map<SatId, Seconds> gnss_delays;
  bool feasible = false;

  Seconds min_delay() const;
  /// The channel program; negative delays of an infeasible plan are clamped to 0.
  AttackScript script() const;
};

/// d_i = (|g_i - fake| - |g_i - true|) / c + backward_delay / 2.
SpoofPlan plan_spoof(const EcefVector& true_pos, const EcefVector& fake_pos, std::span<const SatelliteState> gnss,
                     Seconds backward_delay);

enum class SchemeVariant { a, b };

struct GroundStationScheme {
  SchemeVariant variant = SchemeVariant::a;
  Seconds wait_time = 0;         // A: challenge arrival to GNSS reception at the station
  Seconds processing = 0;        // station processing delay
  Seconds correction = 0;        // offset from the response to the UE's GNSS broadcasts
  Seconds gnss_spoof_delay = 0;  // delay on the station's own GNSS feed

  void validate() const;
};

struct SchemeGeometry {
  EcefVector ue_position = EcefVector::Zero();
  EcefVector station_position = EcefVector::Zero();
  SatelliteState station_gnss;              // satellite the station times itself against
  std::vector<SatelliteState> ue_gnss;      // broadcasts heard by the UE
};

struct SchemeClocks {
  ClockModel ue{ClockId::ue};
  ClockModel station{ClockId::ground_station};
};

struct SchemeOutcome {
  Seconds reported_wait = 0;
  Seconds reported_processing = 0;
  std::vector<Seconds> reported_corrections;  // per UE broadcast
  std::vector<SumConstraint> constraints;
  std::vector<double> sum_errors_m;           // measured minus geometric
  double sum_error_m = 0.0;                   // mean of sum_errors_m
};

/// Simulates one ranging round with a ground station acting as the anchor.
SchemeOutcome run_scheme(const GroundStationScheme& scheme, const SchemeGeometry& geometry,
                         const SchemeClocks& clocks, Seconds start_true_time = 0);

}  // namespace trick
