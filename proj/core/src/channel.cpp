#include "trick/channel.hpp"

#include <cmath>

#include "trick/constants.hpp"
#include "trick/errors.hpp"

namespace trick {
namespace {

bool valid_delay(Seconds d) { return std::isfinite(static_cast<double>(d)) && d >= 0; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Seconds AttackScript::gnss_delay(SatId id) const {
  auto it = gnss_delays.find(id);
  return it == gnss_delays.end() ? Seconds{0} : it->second;
}

bool validate_script(const AttackScript& s) {
  if (!valid_delay(s.forward_delay) || !valid_delay(s.backward_delay) || !valid_delay(s.gs_gnss_delay)) return false;
  for (const auto& [id, d] : s.gnss_delays)
    if (!valid_delay(d)) return false;
  return true;
}

bool script_dominated_by(const AttackScript& s1, const AttackScript& s2) {
  if (s1.forward_delay > s2.forward_delay || s1.backward_delay > s2.backward_delay ||
      s1.gs_gnss_delay > s2.gs_gnss_delay)
    return false;
  for (const auto& [id, d] : s1.gnss_delays)
    if (d > s2.gnss_delay(id)) return false;
  for (const auto& [id, d] : s2.gnss_delays)
    if (s1.gnss_delay(id) > d) return false;
  return true;
}

NoiseStream::NoiseStream(const NoiseModel& model) : sigma_m_(model.sigma_m), engine_(model.seed) {
  if (!(model.sigma_m >= 0.0)) throw Error(ErrorCode::invalid_argument, "noise sigma must be >= 0");
}

double NoiseStream::draw_m() { return sigma_m_ * normal_(engine_); }

PropagationResult propagate_signal(const EcefVector& from, const EcefVector& to, Seconds depart_true_time,
                                   Seconds extra_delay, NoiseStream& noise) {
  if (!valid_delay(extra_delay))
    throw Error(ErrorCode::negative_delay, "adversarial delay must be finite and non-negative");
  PropagationResult r;
  r.depart_true_time = depart_true_time;
  r.path_length_m = (to - from).norm();
  r.extra_delay = extra_delay;
  r.arrival_true_time =
      depart_true_time + static_cast<Seconds>(r.path_length_m) / static_cast<Seconds>(kSpeedOfLight) + extra_delay;
  r.toa_error = static_cast<Seconds>(noise.draw_m()) / static_cast<Seconds>(kSpeedOfLight);
  return r;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(base) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

}  // namespace trick
