#pragma once

// Position verification: triangle containment (first check), sum residuals
// (second check), RTT-vs-geometry clock check and the oscillator drift bound.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trick/orbits.hpp"
#include "trick/protocol.hpp"
#include "trick/timing.hpp"

namespace trick {

/// Triangles with a smaller solid angle are skipped as degenerate.
inline constexpr double kDegenerateSolidAngle = 1e-10;  // sr

struct TriangleTest {
  SatId gnss_id = 0;
  double solid_angle_sr = 0.0;
  bool degenerate = false;
  bool contains = false;
};

struct FirstCheckResult {
  bool pass = false;
  std::vector<TriangleTest> triangles;
};

struct ResidualPolicy {
  double threshold_m = 50.0;

  void validate() const;
};

struct SecondCheckResult {
  bool pass = false;
  std::vector<double> residuals_m;  // absolute
  double max_residual_m = 0.0;
};

struct ClockCheckResult {
  bool pass = false;
  Seconds rtt_mismatch = 0;  // measured minus geometric round trip
  Seconds tolerance = 0;
};

struct DriftCheckResult {
  bool pass = false;
  double observed_drift = 0.0;
  double bound = 0.0;
};

/// The anchors are two LEOs, or one LEO at two instants. Each GNSS satellite
/// closes one triangle; the check passes if any non-degenerate one contains
/// the subsatellite point of pos.
FirstCheckResult first_check(const EcefVector& pos, const EcefVector& anchor_a, const EcefVector& anchor_b,
                             std::span<const SatelliteState> gnss);

SecondCheckResult second_check(const EcefVector& pos, std::span<const SumConstraint> constraints,
                               const ResidualPolicy& policy = {});

/// 2 * sigma_leo / c + 100 ns.
Seconds default_clock_tolerance(double leo_sigma_m);

ClockCheckResult clock_check(const RangingExchange& x, const EcefVector& verified_pos, const EcefVector& leo_pos,
                             Seconds tolerance);

/// Boundary inclusive. Throws InvalidArgument for a non-positive bound.
DriftCheckResult drift_check(double observed, double oscillator_bound);

struct IntegrityReport {
  std::optional<FirstCheckResult> triangle;
  std::optional<SecondCheckResult> residual;
  std::optional<ClockCheckResult> clock;
  std::optional<DriftCheckResult> drift;

  bool accepted() const;
  /// Names of the failed checks joined by '+', empty when accepted.
  std::string reject_reason() const;
};

nlohmann::ordered_json to_json(const IntegrityReport& report);

}  // namespace trick
