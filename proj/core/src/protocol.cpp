#include "trick/protocol.hpp"

#include "trick/constants.hpp"
#include "trick/errors.hpp"

namespace trick {
namespace {

constexpr Seconds kC = static_cast<Seconds>(kSpeedOfLight);

std::string leo_name(SatId id) { return "leo:" + std::to_string(id); }
std::string gnss_name(SatId id) { return "gnss:" + std::to_string(id); }

}  // namespace

ExchangeOutcome run_exchange(const EcefVector& ue_pos, const SatelliteState& leo, const ClockModel& ue_clock,
                             const ClockModel& leo_clock, const AttackScript& script, Seconds start_true_time,
                             const LinkOptions& options) {
  if (!validate_script(script)) throw Error(ErrorCode::negative_delay, "attack script has a negative delay");
  if (options.processing_delay < 0) throw Error(ErrorCode::invalid_argument, "processing delay must be >= 0");
  ue_clock.validate();
  leo_clock.validate();

  NoiseStream silent(NoiseModel{0.0, 0});
  NoiseStream& noise = options.noise ? *options.noise : silent;

  ExchangeOutcome out;
  const Timestamp t1 = clock_read(ue_clock, start_true_time);
  const auto up = propagate_signal(ue_pos, leo.position, start_true_time, script.forward_delay, noise);
  const Timestamp t2 = clock_read(leo_clock, up.observed_arrival());

  const Seconds tx_local = t2.value + options.processing_delay;
  const Seconds tx_true = leo_clock.true_time_of(tx_local);
  const auto down = propagate_signal(leo.position, ue_pos, tx_true, script.backward_delay, noise);
  const Timestamp t3 = clock_read(ue_clock, down.observed_arrival());

  out.exchange = {t1, t2, t3, options.processing_delay};
  out.response = {leo.id, leo.position, t2.value, tx_local, options.processing_delay, true};
  out.events.push_back({"uplink", "ue", leo_name(leo.id), start_true_time, up.arrival_true_time, t1, t2,
                        script.forward_delay, up.toa_error});
  out.events.push_back({"downlink", leo_name(leo.id), "ue", tx_true, down.arrival_true_time,
                        Timestamp{tx_local, leo_clock.id}, t3, script.backward_delay, down.toa_error});
  return out;
}

std::vector<BroadcastPlan> schedule_broadcasts(std::span<const SatelliteState> sats, Seconds transmit_time) {
  std::vector<BroadcastPlan> out;
  out.reserve(sats.size());
  for (const auto& s : sats) out.push_back({s, transmit_time});
  return out;
}

std::vector<GnssBroadcast> receive_broadcasts(const EcefVector& ue_pos, const ClockModel& ue_clock,
                                              std::span<const BroadcastPlan> plans, const AttackScript& script,
                                              NoiseStream& noise, std::vector<SignalEvent>* events) {
  if (!validate_script(script)) throw Error(ErrorCode::negative_delay, "attack script has a negative delay");
  std::vector<GnssBroadcast> out;
  out.reserve(plans.size());
  for (const auto& plan : plans) {
    const Seconds delay = script.gnss_delay(plan.sat.id);
    const auto sig = propagate_signal(plan.sat.position, ue_pos, plan.transmit_time, delay, noise);
    const Timestamp arrival = clock_read(ue_clock, sig.observed_arrival());
    out.push_back({plan.sat.id, plan.sat.position, plan.transmit_time, arrival});
    if (events) {
      events->push_back({"broadcast", gnss_name(plan.sat.id), "ue", plan.transmit_time, sig.arrival_true_time,
                         Timestamp{plan.transmit_time, ClockId::global}, arrival, delay, sig.toa_error});
    }
  }
  return out;
}

std::vector<SumConstraint> form_sums(const RangingExchange& x, const LeoResponse& resp,
                                     std::span<const GnssBroadcast> broadcasts) {
  if (!resp.authenticated)
    throw Error(ErrorCode::unauthenticated_response, "LEO response failed authentication");
  std::vector<SumConstraint> out;
  out.reserve(broadcasts.size());
  for (const auto& b : broadcasts) {
    const Seconds since_challenge = elapsed(b.arrival_local, x.t1_u);
    if (since_challenge <= 0)
      throw Error(ErrorCode::stale_reference,
                  "broadcast from satellite " + std::to_string(b.sat_id) + " arrived before the challenge was sent");
    const Seconds offset = resp.transmit_time_global - b.transmit_time;
    const Seconds combined_tof = since_challenge - resp.processing_delay + offset;
    out.push_back({resp.sat_id, b.sat_id, resp.sat_position, b.sat_position, kC * combined_tof});
  }
  return out;
}

bool check_key_window(const LeoResponse& resp, const GnssBroadcast& b, const KeyWindowPolicy& policy) {
  const Seconds offset = resp.transmit_time_global - b.transmit_time;
  return !(offset > 0 && offset >= policy.disclosure_delay);
}

bool loose_sync_check(const RangingExchange& x, Seconds tau_max, Seconds tolerance) {
  return two_way_tof(x) <= tau_max + tolerance;
}

}  // namespace trick
