#pragma once

// Line-of-sight propagation and the adversary's delay program. The
// adversary can only hold signals back; it never advances or forges them.

#include <cstdint>
#include <map>
#include <random>

#include "trick/geodesy.hpp"
#include "trick/orbits.hpp"
#include "trick/timing.hpp"

namespace trick {

struct AttackScript {
  Seconds forward_delay = 0;                // UE -> LEO challenge
  Seconds backward_delay = 0;               // LEO -> UE response
  std::map<SatId, Seconds> gnss_delays;     // per GNSS broadcast to the UE
  Seconds gs_gnss_delay = 0;                // GNSS -> ground station feed

  Seconds gnss_delay(SatId id) const;
};

/// True iff every delay is finite and non-negative.
bool validate_script(const AttackScript& s);

/// Componentwise s1 <= s2, treating absent GNSS entries as zero.
bool script_dominated_by(const AttackScript& s1, const AttackScript& s2);

struct NoiseModel {
  double sigma_m = 0.0;  // range-equivalent standard deviation
  std::uint64_t seed = 42;
};

/// Zero-mean Gaussian range errors. One stream per propagation sequence;
/// a draw is consumed per signal even when sigma is zero so that scripts
/// sharing a seed see the same noise realization.
class NoiseStream {
 public:
  explicit NoiseStream(const NoiseModel& model);

  double draw_m();
  double sigma_m() const { return sigma_m_; }

 private:
  double sigma_m_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct PropagationResult {
  Seconds depart_true_time = 0;
  Seconds arrival_true_time = 0;  // >= depart + path/c, delays only add
  double path_length_m = 0.0;
  Seconds extra_delay = 0;
  Seconds toa_error = 0;  // receiver time-of-arrival estimation error, noise/c

  Seconds observed_arrival() const { return arrival_true_time + toa_error; }
};

/// Throws NegativeDelay when extra_delay < 0.
PropagationResult propagate_signal(const EcefVector& from, const EcefVector& to, Seconds depart_true_time,
                                   Seconds extra_delay, NoiseStream& noise);

/// Stable seed for sub-stream (a, b) of a base seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace trick
