#pragma once

// Challenge/response ranging with a LEO anchor, reception of authenticated
// GNSS broadcasts, and assembly of the sum-of-distance constraints.

#include <span>
#include <string>
#include <vector>

#include "trick/channel.hpp"
#include "trick/orbits.hpp"
#include "trick/timing.hpp"

namespace trick {

struct GnssBroadcast {
  SatId sat_id = 0;
  EcefVector sat_position = EcefVector::Zero();  // authenticated ephemeris
  Seconds transmit_time = 0;                     // authenticated, global time
  Timestamp arrival_local;                       // UE clock
};

struct LeoResponse {
  SatId sat_id = 0;
  EcefVector sat_position = EcefVector::Zero();
  Seconds receive_time_global = 0;   // t2 on the LEO's synchronized clock
  Seconds transmit_time_global = 0;  // receive + processing
  Seconds processing_delay = 0;
  bool authenticated = false;
};

/// One ellipsoid: points whose distances to the two foci sum to measured_sum.
struct SumConstraint {
  SatId leo_id = 0;
  SatId sat_id = 0;
  EcefVector leo_position = EcefVector::Zero();
  EcefVector gnss_position = EcefVector::Zero();
  long double measured_sum = 0;  // meters

  double foci_separation() const { return (leo_position - gnss_position).norm(); }
};

struct KeyWindowPolicy {
  Seconds disclosure_delay = 30;
};

/// One row per signal: who sent it, who heard it, and when on which clock.
struct SignalEvent {
  std::string link;  // uplink | downlink | broadcast
  std::string sender;
  std::string receiver;
  Seconds depart_true = 0;
  Seconds arrive_true = 0;
  Timestamp depart_local;
  Timestamp arrive_local;
  Seconds delay_applied = 0;
  Seconds toa_error = 0;
};

struct LinkOptions {
  Seconds processing_delay = 0;
  NoiseStream* noise = nullptr;  // LEO link noise; nullptr means noise-free
};

struct ExchangeOutcome {
  RangingExchange exchange;
  LeoResponse response;
  std::vector<SignalEvent> events;
};

/// Challenge leaves the UE at start_true_time; forward delay applies to the
/// uplink and backward delay to the response. Positions are frozen for the
/// duration of the exchange.
ExchangeOutcome run_exchange(const EcefVector& ue_pos, const SatelliteState& leo, const ClockModel& ue_clock,
                             const ClockModel& leo_clock, const AttackScript& script, Seconds start_true_time,
                             const LinkOptions& options = {});

struct BroadcastPlan {
  SatelliteState sat;
  Seconds transmit_time = 0;  // global
};

/// Every satellite transmits at the same global instant.
std::vector<BroadcastPlan> schedule_broadcasts(std::span<const SatelliteState> sats, Seconds transmit_time);

/// Per-broadcast delays come from script.gnss_delays; `noise` perturbs the
/// UE's time-of-arrival estimate.
std::vector<GnssBroadcast> receive_broadcasts(const EcefVector& ue_pos, const ClockModel& ue_clock,
                                              std::span<const BroadcastPlan> plans, const AttackScript& script,
                                              NoiseStream& noise, std::vector<SignalEvent>* events = nullptr);

/// c * [(arrival_i - t1) - processing + (t_leo_tx - t_gnss_tx_i)] per broadcast.
/// Throws UnauthenticatedResponse or StaleReference.
std::vector<SumConstraint> form_sums(const RangingExchange& x, const LeoResponse& resp,
                                     std::span<const GnssBroadcast> broadcasts);

/// Rejects a broadcast transmitted before the LEO response by at least the
/// key disclosure delay.
bool check_key_window(const LeoResponse& resp, const GnssBroadcast& b, const KeyWindowPolicy& policy);

inline constexpr Seconds kDefaultLooseSyncTolerance = 10e-6L;

/// Two-way ToF must not exceed the orbit-derived maximum (boundary inclusive).
bool loose_sync_check(const RangingExchange& x, Seconds tau_max, Seconds tolerance = kDefaultLooseSyncTolerance);

}  // namespace trick
