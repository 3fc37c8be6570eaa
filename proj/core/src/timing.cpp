#include "trick/timing.hpp"

#include <cmath>
#include <string>

#include "trick/errors.hpp"

namespace trick {

std::string_view to_string(ClockId id) noexcept {
  switch (id) {
    case ClockId::global: return "global";
    case ClockId::ue: return "ue";
    case ClockId::leo: return "leo";
    case ClockId::ground_station: return "ground_station";
  }
  return "unknown";
}

Seconds elapsed(const Timestamp& later, const Timestamp& earlier) {
  if (later.clock != earlier.clock) {
    throw Error(ErrorCode::clock_mismatch, "cannot subtract a " + std::string(to_string(earlier.clock)) +
                                               " timestamp from a " + std::string(to_string(later.clock)) +
                                               " timestamp");
  }
  return later.value - earlier.value;
}

void ClockModel::validate() const {
  if (!(std::abs(drift) < 1e-3) || !std::isfinite(static_cast<double>(bias)))
    throw Error(ErrorCode::invalid_argument, "clock drift must satisfy |drift| < 1e-3 and bias must be finite");
}

Seconds ClockModel::true_time_of(Seconds local) const {
  return (local - bias + static_cast<Seconds>(drift) * epoch) / (1.0L + static_cast<Seconds>(drift));
}

Timestamp clock_read(const ClockModel& clock, Seconds true_time) {
  return {true_time + clock.bias + static_cast<Seconds>(clock.drift) * (true_time - clock.epoch), clock.id};
}

Seconds two_way_offset(const RangingExchange& x) {
  const Seconds t1 = x.t1_u.value;
  const Seconds t2 = x.t2_l.value;
  const Seconds t3 = x.t3_u.value;
  return ((t2 - t1) - (t3 - x.processing_delay - t2)) / 2;
}

Seconds two_way_tof(const RangingExchange& x) {
  const Seconds rtt = elapsed(x.t3_u, x.t1_u) - x.processing_delay;
  if (rtt < 0) throw Error(ErrorCode::negative_rtt, "round trip minus processing delay is negative");
  return rtt / 2;
}

double drift_estimate(std::span<const BiasSample> samples) {
  if (samples.size() < 2) throw Error(ErrorCode::insufficient_samples, "drift estimate needs at least two samples");
  Seconds mean_t = 0;
  Seconds mean_b = 0;
  for (const auto& s : samples) {
    mean_t += s.true_time;
    mean_b += s.bias;
  }
  mean_t /= static_cast<Seconds>(samples.size());
  mean_b /= static_cast<Seconds>(samples.size());
  Seconds sxx = 0;
  Seconds sxy = 0;
  for (const auto& s : samples) {
    const Seconds dt = s.true_time - mean_t;
    sxx += dt * dt;
    sxy += dt * (s.bias - mean_b);
  }
  if (sxx == 0) throw Error(ErrorCode::insufficient_samples, "drift estimate needs two distinct sample times");
  return static_cast<double>(sxy / sxx);
}

}  // namespace trick
