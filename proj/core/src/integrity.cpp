#include "trick/integrity.hpp"

#include <algorithm>
#include <cmath>

#include "trick/constants.hpp"
#include "trick/errors.hpp"

namespace trick {

void ResidualPolicy::validate() const {
  if (!(threshold_m > 0.0)) throw Error(ErrorCode::invalid_argument, "residual threshold must be positive");
}

FirstCheckResult first_check(const EcefVector& pos, const EcefVector& anchor_a, const EcefVector& anchor_b,
                             std::span<const SatelliteState> gnss) {
  FirstCheckResult out;
  const UnitVector p = subsatellite_point(pos);
  const UnitVector a = subsatellite_point(anchor_a);
  const UnitVector b = subsatellite_point(anchor_b);
  for (const auto& g : gnss) {
    TriangleTest t;
    t.gnss_id = g.id;
    const SphericalTriangle tri{a, b, subsatellite_point(g.position)};
    t.solid_angle_sr = solid_angle(tri);
    t.degenerate = t.solid_angle_sr < kDegenerateSolidAngle;
    t.contains = !t.degenerate && point_in_spherical_triangle(p, tri);
    out.pass = out.pass || t.contains;
    out.triangles.push_back(t);
  }
  return out;
}

SecondCheckResult second_check(const EcefVector& pos, std::span<const SumConstraint> constraints,
                               const ResidualPolicy& policy) {
  policy.validate();
  SecondCheckResult out;
  for (const auto& c : constraints) {
    const long double geometric = static_cast<long double>((pos - c.leo_position).norm()) +
                                  static_cast<long double>((pos - c.gnss_position).norm());
    const double r = static_cast<double>(std::fabs(geometric - c.measured_sum));
    out.residuals_m.push_back(r);
    out.max_residual_m = std::max(out.max_residual_m, r);
  }
  out.pass = out.max_residual_m <= policy.threshold_m;
  return out;
}

Seconds default_clock_tolerance(double leo_sigma_m) {
  return 2.0L * static_cast<Seconds>(leo_sigma_m) / static_cast<Seconds>(kSpeedOfLight) + 1e-7L;
}

ClockCheckResult clock_check(const RangingExchange& x, const EcefVector& verified_pos, const EcefVector& leo_pos,
                             Seconds tolerance) {
  const Seconds measured = elapsed(x.t3_u, x.t1_u) - x.processing_delay;
  const Seconds geometric = 2.0L * static_cast<Seconds>((verified_pos - leo_pos).norm()) /
                            static_cast<Seconds>(kSpeedOfLight);
  ClockCheckResult out;
  out.rtt_mismatch = measured - geometric;
  out.tolerance = tolerance;
  out.pass = std::fabs(out.rtt_mismatch) <= tolerance;
  return out;
}

DriftCheckResult drift_check(double observed, double oscillator_bound) {
  if (!(oscillator_bound > 0.0)) throw Error(ErrorCode::invalid_argument, "oscillator drift bound must be positive");
  return {std::fabs(observed) <= oscillator_bound, observed, oscillator_bound};
}

bool IntegrityReport::accepted() const { return reject_reason().empty(); }

std::string IntegrityReport::reject_reason() const {
  std::string reason;
  auto add = [&reason](const char* name) {
    if (!reason.empty()) reason += '+';
    reason += name;
  };
  if (triangle && !triangle->pass) add("triangle");
  if (residual && !residual->pass) add("residual");
  if (clock && !clock->pass) add("clock");
  if (drift && !drift->pass) add("drift");
  return reason;
}

nlohmann::ordered_json to_json(const IntegrityReport& report) {
  nlohmann::ordered_json j;
  if (report.triangle) {
    auto& t = j["triangle"];
    t["pass"] = report.triangle->pass;
    t["tests"] = nlohmann::ordered_json::array();
    for (const auto& tt : report.triangle->triangles) {
      t["tests"].push_back({{"gnss_id", tt.gnss_id},
                            {"solid_angle_sr", tt.solid_angle_sr},
                            {"degenerate", tt.degenerate},
                            {"contains", tt.contains}});
    }
  }
  if (report.residual) {
    auto& r = j["residual"];
    r["pass"] = report.residual->pass;
    r["max_residual_m"] = report.residual->max_residual_m;
    r["residuals_m"] = report.residual->residuals_m;
  }
  if (report.clock) {
    auto& c = j["clock"];
    c["pass"] = report.clock->pass;
    c["rtt_mismatch_s"] = static_cast<double>(report.clock->rtt_mismatch);
    c["tolerance_s"] = static_cast<double>(report.clock->tolerance);
  }
  if (report.drift) {
    auto& d = j["drift"];
    d["pass"] = report.drift->pass;
    d["observed_drift"] = report.drift->observed_drift;
    d["bound"] = report.drift->bound;
  }
  j["verdict"] = report.accepted() ? "accept" : "reject";
  if (!report.accepted()) j["reason"] = report.reject_reason();
  return j;
}

}  // namespace trick
