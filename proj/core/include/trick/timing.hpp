#pragma once

// Clocks and the two-way time-transfer algebra.
//
// Simulation instants and intervals use extended precision: sums of
// distances reach ~2.6e7 m and the protocol's cancellation properties are
// checked to 1e-9 m, below the spacing of doubles at that magnitude.

#include <cstdint>
#include <span>
#include <string_view>

namespace trick {

using Seconds = long double;

enum class ClockId : std::uint8_t { global, ue, leo, ground_station };

std::string_view to_string(ClockId id) noexcept;

struct Timestamp {
  Seconds value = 0;
  ClockId clock = ClockId::global;
};

/// later - earlier; both stamps must come from the same clock.
Seconds elapsed(const Timestamp& later, const Timestamp& earlier);

/// Linear clock: local = true + bias + drift * (true - epoch).
struct ClockModel {
  ClockId id = ClockId::global;
  Seconds bias = 0;
  double drift = 0.0;
  Seconds epoch = 0;

  /// Throws InvalidArgument unless |drift| < 1e-3.
  void validate() const;
  /// True time at which this clock shows `local`.
  Seconds true_time_of(Seconds local) const;
};

Timestamp clock_read(const ClockModel& clock, Seconds true_time);

/// Timestamps of one distance-bounding round.
struct RangingExchange {
  Timestamp t1_u;  // challenge sent, UE clock
  Timestamp t2_l;  // challenge received, LEO clock
  Timestamp t3_u;  // response received, UE clock
  Seconds processing_delay = 0;
};

/// Offset of the LEO clock relative to the UE clock:
/// ((t2 - t1) - (t3 - processing - t2)) / 2.
Seconds two_way_offset(const RangingExchange& x);

/// One-way time of flight (t3 - t1 - processing) / 2. Throws NegativeRtt
/// when the corrected round trip is negative.
Seconds two_way_tof(const RangingExchange& x);

struct BiasSample {
  Seconds true_time = 0;
  Seconds bias = 0;
};

/// Least-squares slope of bias over time in s/s. Throws
/// InsufficientSamples with fewer than two distinct sample times.
double drift_estimate(std::span<const BiasSample> samples);

}  // namespace trick
