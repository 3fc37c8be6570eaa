#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "trick/constants.hpp"
#include "trick/errors.hpp"
#include "trick/experiments.hpp"
#include "trick/integrity.hpp"

using namespace trick;

namespace {

struct Verdict {
  FirstCheckResult first;
  SecondCheckResult second;
  ClockCheckResult clock;
  PositionSolution solution;
};

Verdict verify(const Snapshot& snap, const Session& s, double threshold = 50.0) {
  Verdict v;
  v.solution = ellipsoidal_multilaterate(s.sums);
  v.first = first_check(v.solution.position, snap.leo_anchors[0].position, snap.second_anchor, snap.gnss);
  v.second = second_check(v.solution.position, s.sums, {threshold});
  v.clock = clock_check(s.exchanges[0].exchange, v.solution.position, snap.leo_anchors[0].position,
                        default_clock_tolerance(0.0));
  return v;
}

}  // namespace

TEST(Integrity, CentroidOfATrianglePasses) {
  const EcefVector a(7.5e6, 0, 0), b(0, 7.5e6, 0);
  const std::vector<SatelliteState> gnss{{2000, {0, 0, 2.6e7}}};
  const EcefVector inside = (a.normalized() + b.normalized() + gnss[0].position.normalized()).normalized() * 6.4e6;
  const auto r = first_check(inside, a, b, gnss);
  EXPECT_TRUE(r.pass);
  ASSERT_EQ(r.triangles.size(), 1u);
  EXPECT_NEAR(r.triangles[0].solid_angle_sr, kPi / 2, 1e-12);
  EXPECT_FALSE(first_check(-inside, a, b, gnss).pass);
}

TEST(Integrity, NoGnssNoTriangle) {
  EXPECT_FALSE(first_check({6.4e6, 0, 0}, {7e6, 0, 0}, {0, 7e6, 0}, {}).pass);
}

TEST(Integrity, DuplicateAnchorsAreDegenerate) {
  const EcefVector a(7.5e6, 0, 0);
  const std::vector<SatelliteState> gnss{{2000, {0, 0, 2.6e7}}};
  const auto r = first_check(a.normalized() * 6.4e6, a, a, gnss);
  EXPECT_FALSE(r.pass);
  EXPECT_TRUE(r.triangles[0].degenerate);
}

TEST(Integrity, SecondCheckOnExactSolution) {
  const Snapshot snap = synthetic_snapshot(4, 6, 2);
  const Session s = run_session(snap, {}, {});
  const auto r = second_check(snap.ue, s.sums);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.max_residual_m, 1e-3);
  EXPECT_EQ(r.residuals_m.size(), s.sums.size());
  EXPECT_THROW(second_check(snap.ue, s.sums, {0.0}), Error);
}

TEST(Integrity, ClockCheckExamples) {
  const Snapshot snap = synthetic_snapshot(8, 4, 1);
  const Session benign = run_session(snap, {}, {});
  const auto ok = clock_check(benign.exchanges[0].exchange, snap.ue, snap.leo_anchors[0].position, 1e-7L);
  EXPECT_TRUE(ok.pass);
  EXPECT_LT(std::fabs(ok.rtt_mismatch), 1e-12L);

  AttackScript a;
  a.backward_delay = 1e-3L;
  const Session attacked = run_session(snap, a, {});
  const auto bad = clock_check(attacked.exchanges[0].exchange, snap.ue, snap.leo_anchors[0].position, 1e-7L);
  EXPECT_FALSE(bad.pass);
  EXPECT_NEAR(static_cast<double>(bad.rtt_mismatch), 1e-3, 1e-12);
}

TEST(Integrity, ClockCheckNoiseOnlyPassesAtThreeSigma) {
  const double sigma = 5.0;
  // Two independent one-way errors: the round trip has sd sqrt(2) sigma / c.
  const Seconds tol = 3.0L * std::sqrt(2.0L) * sigma / static_cast<Seconds>(kSpeedOfLight);
  int pass = 0;
  const int trials = 1000;
  for (int i = 0; i < trials; ++i) {
    const Snapshot snap = synthetic_snapshot(5000 + i, 3, 1);
    SessionOptions opt;
    opt.leo_sigma_m = sigma;
    opt.seed = 90000 + i;
    const Session s = run_session(snap, {}, opt);
    pass += clock_check(s.exchanges[0].exchange, snap.ue, snap.leo_anchors[0].position, tol).pass ? 1 : 0;
  }
  EXPECT_GE(pass, 990);
}

TEST(Integrity, DefaultClockTolerance) {
  EXPECT_NEAR(static_cast<double>(default_clock_tolerance(0.0)), 1e-7, 1e-20);
  EXPECT_NEAR(static_cast<double>(default_clock_tolerance(15.0)), 1e-7 + 30.0 / kSpeedOfLight, 1e-18);
}

TEST(Integrity, DriftCheckExamples) {
  EXPECT_TRUE(drift_check(0.0, 1e-7).pass);
  EXPECT_TRUE(drift_check(1e-7, 1e-7).pass);
  EXPECT_TRUE(drift_check(-1e-7, 1e-7).pass);
  EXPECT_FALSE(drift_check(2e-7, 1e-7).pass);
  EXPECT_THROW(drift_check(0.0, 0.0), Error);
}

// A backward delay growing at 1e-5 s/s shows up as a bias ramp of half
// that slope, far outside a 1e-7 oscillator bound.
TEST(Integrity, RampingDelayBreaksDriftBound) {
  const Snapshot snap = synthetic_snapshot(10, 3, 1);
  ClockModel ue{ClockId::ue, 0.004L};
  ClockModel leo{ClockId::leo};
  std::vector<BiasSample> samples;
  for (int k = 0; k < 20; ++k) {
    const Seconds t = 10.0L * k;
    AttackScript a;
    a.backward_delay = 1e-5L * t;
    const auto ex = run_exchange(snap.ue, snap.leo_anchors[0], ue, leo, a, t);
    samples.push_back({t, two_way_offset(ex.exchange)});
  }
  const double slope = drift_estimate(samples);
  EXPECT_NEAR(slope, -5e-6, 1e-12);
  EXPECT_FALSE(drift_check(slope, 1e-7).pass);
}

TEST(Integrity, BenignScenariosAccepted) {
  std::mt19937_64 rng(123);
  int contained = 0;
  for (int i = 0; i < 1000; ++i) {
    const Snapshot snap = synthetic_snapshot(rng(), 6, 2);
    if (!first_check(snap.ue, snap.leo_anchors[0].position, snap.second_anchor, snap.gnss).pass) continue;
    ++contained;
    const Session s = run_session(snap, {}, {});
    const Verdict v = verify(snap, s);
    IntegrityReport rep{v.first, v.second, v.clock, std::nullopt};
    EXPECT_TRUE(rep.accepted()) << "case " << i << ": " << rep.reject_reason();
  }
  EXPECT_GT(contained, 100);
}

TEST(Integrity, DisplacingAttacksFailSecondCheck) {
  std::mt19937_64 rng(456);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int displaced = 0;
  for (int i = 0; i < 1000; ++i) {
    const Snapshot snap = synthetic_snapshot(rng(), 6, 2);
    SessionOptions opt;
    opt.seed = rng();
    opt.gnss_sigma_m = 50.0 * u(rng);
    const Session benign = run_session(snap, {}, opt);
    AttackScript a;
    a.backward_delay = static_cast<Seconds>(1e-3 * u(rng));
    for (const auto& g : snap.gnss)
      if (u(rng) < 0.5) a.gnss_delays[g.id] = static_cast<Seconds>(2e-5 * u(rng));
    const Session attacked = run_session(snap, a, opt);
    SolverConfig cfg;
    cfg.throw_on_nonconvergence = false;
    const auto base = ellipsoidal_multilaterate(benign.sums, cfg);
    const auto sol = ellipsoidal_multilaterate(attacked.sums, cfg);
    if ((sol.position - base.position).norm() < 200.0) continue;
    ++displaced;
    EXPECT_FALSE(second_check(sol.position, attacked.sums, {50.0}).pass) << "case " << i;
  }
  EXPECT_GT(displaced, 300);
}

TEST(Integrity, BackwardDelayAloneOnlyTripsTheClock) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Snapshot snap = synthetic_snapshot(seed, 6, 2);
    if (!first_check(snap.ue, snap.leo_anchors[0].position, snap.second_anchor, snap.gnss).pass) continue;
    AttackScript a;
    a.backward_delay = 1e-3L;
    const Verdict v = verify(snap, run_session(snap, a, {}));
    EXPECT_TRUE(v.first.pass);
    EXPECT_TRUE(v.second.pass);
    EXPECT_FALSE(v.clock.pass);
    IntegrityReport rep{v.first, v.second, v.clock, std::nullopt};
    EXPECT_EQ(rep.reject_reason(), "clock");
  }
}

TEST(Integrity, ReportJson) {
  IntegrityReport rep;
  rep.residual = SecondCheckResult{false, {120.0}, 120.0};
  rep.drift = DriftCheckResult{false, 1e-6, 1e-7};
  const auto j = to_json(rep);
  EXPECT_EQ(j["verdict"], "reject");
  EXPECT_EQ(j["reason"], "residual+drift");
  EXPECT_FALSE(j.contains("triangle"));
  IntegrityReport empty;
  EXPECT_TRUE(empty.accepted());
  EXPECT_EQ(to_json(empty)["verdict"], "accept");
}
