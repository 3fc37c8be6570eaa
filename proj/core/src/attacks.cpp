#include "trick/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trick/constants.hpp"
#include "trick/errors.hpp"

namespace trick {
namespace {

constexpr Seconds kC = static_cast<Seconds>(kSpeedOfLight);

Seconds light_time(const EcefVector& a, const EcefVector& b) {
  return static_cast<Seconds>((a - b).norm()) / kC;
}

}  // namespace

std::vector<RangeMeasurement> victim_pseudoranges(const RangingExchange& x, const LeoResponse& resp,
                                                  std::span<const GnssBroadcast> broadcasts) {
  if (!resp.authenticated)
    throw Error(ErrorCode::unauthenticated_response, "LEO response failed authentication");
  const Seconds offset = two_way_offset(x);
  const Seconds tx_on_ue_clock = resp.transmit_time_global - offset;
  std::vector<RangeMeasurement> out;
  out.reserve(broadcasts.size());
  for (const auto& b : broadcasts) {
    const Seconds flight = b.arrival_local.value - tx_on_ue_clock + (resp.transmit_time_global - b.transmit_time);
    out.push_back({b.sat_id, b.sat_position, static_cast<double>(kC * flight)});
  }
  return out;
}

Seconds SpoofPlan::min_delay() const {
  Seconds m = std::numeric_limits<Seconds>::infinity();
  for (const auto& [id, d] : gnss_delays) m = std::min(m, d);
  return m;
}

AttackScript SpoofPlan::script() const {
  AttackScript s;
  s.backward_delay = backward_delay;
  for (const auto& [id, d] : gnss_delays) s.gnss_delays[id] = std::max<Seconds>(d, 0);
  return s;
}

SpoofPlan plan_spoof(const EcefVector& true_pos, const EcefVector& fake_pos, std::span<const SatelliteState> gnss,
                     Seconds backward_delay) {
  if (!(backward_delay >= 0)) throw Error(ErrorCode::invalid_argument, "backward delay must be >= 0");
  SpoofPlan plan;
  plan.fake_position = fake_pos;
  plan.fake_target = ecef_to_geodetic(fake_pos);
  plan.backward_delay = backward_delay;
  plan.feasible = true;
  for (const auto& g : gnss) {
    const Seconds d = light_time(g.position, fake_pos) - light_time(g.position, true_pos) + backward_delay / 2;
    plan.gnss_delays[g.id] = d;
    if (d < 0) plan.feasible = false;
  }
  return plan;
}

void GroundStationScheme::validate() const {
  if (!(wait_time >= 0 && processing >= 0 && correction >= 0 && gnss_spoof_delay >= 0))
    throw Error(ErrorCode::invalid_argument, "scheme timings must be non-negative");
}

SchemeOutcome run_scheme(const GroundStationScheme& scheme, const SchemeGeometry& geometry,
                         const SchemeClocks& clocks, Seconds start_true_time) {
  scheme.validate();
  clocks.ue.validate();
  clocks.station.validate();

  const EcefVector& ue = geometry.ue_position;
  const EcefVector& gs = geometry.station_position;
  const Seconds uplink = light_time(ue, gs);
  const Seconds station_gnss_flight = light_time(geometry.station_gnss.position, gs);

  const Seconds challenge_true = start_true_time;
  const Seconds challenge_at_gs = challenge_true + uplink;
  const Timestamp t1 = clock_read(clocks.ue, challenge_true);

  // The station's reference broadcast. In scheme A it is chosen so that it
  // lands wait_time after the challenge when not delayed; scheme B only uses
  // it to calibrate the station clock.
  const Seconds ref_tx = challenge_at_gs + scheme.wait_time - station_gnss_flight;
  const Seconds ref_arrival_true = ref_tx + station_gnss_flight + scheme.gnss_spoof_delay;
  const Seconds ref_arrival_local = clock_read(clocks.station, ref_arrival_true).value;

  const Seconds challenge_local = clock_read(clocks.station, challenge_at_gs).value;

  SchemeOutcome out;
  out.reported_processing = scheme.processing;
  Seconds response_true = 0;
  Seconds response_global_estimate = 0;
  Seconds wait_subtracted = 0;

  if (scheme.variant == SchemeVariant::a) {
    out.reported_wait = ref_arrival_local - challenge_local;
    response_true = clocks.station.true_time_of(ref_arrival_local + scheme.processing);
    // Transmission time in global terms, reconstructed from the authenticated
    // GNSS transmit time and the geometric flight time.
    response_global_estimate = ref_tx + station_gnss_flight + scheme.processing;
    wait_subtracted = out.reported_wait;
  } else {
    const Seconds response_local = challenge_local + scheme.processing;
    response_true = clocks.station.true_time_of(response_local);
    const Seconds bias_estimate = ref_arrival_local - (ref_tx + station_gnss_flight);
    response_global_estimate = response_local - bias_estimate;
    out.reported_wait = 0;
  }

  // The UE's GNSS broadcasts leave `correction` before the true response.
  const Seconds broadcast_tx = response_true - scheme.correction;
  for (const auto& g : geometry.ue_gnss) {
    const Seconds arrival_true = broadcast_tx + light_time(g.position, ue);
    const Timestamp arrival = clock_read(clocks.ue, arrival_true);
    const Seconds correction = response_global_estimate - broadcast_tx;
    out.reported_corrections.push_back(correction);
    const Seconds since = elapsed(arrival, t1);
    if (since <= 0)
      throw Error(ErrorCode::stale_reference,
                  "broadcast from satellite " + std::to_string(g.id) + " arrived before the challenge was sent");
    const Seconds combined = since - (wait_subtracted + scheme.processing) + correction;
    SumConstraint c{0, g.id, gs, g.position, kC * combined};
    const long double geometric = static_cast<long double>((ue - gs).norm()) +
                                  static_cast<long double>((ue - g.position).norm());
    out.sum_errors_m.push_back(static_cast<double>(c.measured_sum - geometric));
    out.constraints.push_back(c);
  }
  if (!out.sum_errors_m.empty()) {
    long double acc = 0;
    for (double e : out.sum_errors_m) acc += e;
    out.sum_error_m = static_cast<double>(acc / static_cast<long double>(out.sum_errors_m.size()));
  }
  return out;
}

}  // namespace trick
