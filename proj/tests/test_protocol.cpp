#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "trick/constants.hpp"
#include "trick/errors.hpp"
#include "trick/experiments.hpp"
#include "trick/protocol.hpp"

using namespace trick;

namespace {

constexpr long double kC = 299792458.0L;

// UE on the equator, LEO 1200 km overhead, GNSS satellites above.
struct Scene {
  EcefVector ue{6378137.0, 0, 0};
  SatelliteState leo{1000, {6378137.0 + 1.2e6, 0, 0}};
  std::vector<SatelliteState> gnss{{2000, {2.2e7, 1.0e7, 5.0e6}},
                                   {2001, {2.0e7, -1.2e7, 3.0e6}},
                                   {2002, {1.9e7, 2.0e6, -1.5e7}}};
};

struct Round {
  ExchangeOutcome ex;
  std::vector<GnssBroadcast> broadcasts;
  std::vector<SumConstraint> sums;
};

Round play(const Scene& s, const AttackScript& script, Seconds gnss_tx, Seconds ue_bias = 0, Seconds proc = 0) {
  ClockModel ue{ClockId::ue, ue_bias};
  ClockModel leo{ClockId::leo};
  Round r;
  LinkOptions opt;
  opt.processing_delay = proc;
  r.ex = run_exchange(s.ue, s.leo, ue, leo, script, 0, opt);
  NoiseStream quiet({0.0, 1});
  const auto plans = schedule_broadcasts(s.gnss, gnss_tx);
  r.broadcasts = receive_broadcasts(s.ue, ue, plans, script, quiet);
  r.sums = form_sums(r.ex.exchange, r.ex.response, r.broadcasts);
  return r;
}

long double geometric_sum(const Scene& s, const SatelliteState& g) {
  return static_cast<long double>((s.ue - s.leo.position).norm()) + static_cast<long double>((g.position - s.ue).norm());
}

}  // namespace

TEST(Protocol, BenignExchangeTof) {
  Scene s;
  const auto r = play(s, {}, 0);
  EXPECT_NEAR(static_cast<double>(two_way_tof(r.ex.exchange)), 1.2e6 / kSpeedOfLight, 1e-12);
  EXPECT_NEAR(static_cast<double>(two_way_offset(r.ex.exchange)), 0.0, 1e-12);
  EXPECT_TRUE(r.ex.response.authenticated);
  EXPECT_EQ(r.ex.events.size(), 2u);
}

TEST(Protocol, DelaysInflateEstimatesByHalf) {
  Scene s;
  const auto base = play(s, {}, 0);
  AttackScript back;
  back.backward_delay = 1e-3L;
  const auto b = play(s, back, 0);
  EXPECT_NEAR(static_cast<double>(two_way_tof(b.ex.exchange) - two_way_tof(base.ex.exchange)), 0.5e-3, 1e-12);
  AttackScript fwd;
  fwd.forward_delay = 1e-3L;
  const auto f = play(s, fwd, 0);
  EXPECT_NEAR(static_cast<double>(two_way_offset(f.ex.exchange) - two_way_offset(base.ex.exchange)), 0.5e-3, 1e-12);
}

TEST(Protocol, SynchronizedBenignSumsAreGeometric) {
  Scene s;
  // GNSS transmit at the LEO response instant: zero offset.
  const Seconds leo_tx = static_cast<Seconds>(1.2e6) / kC;
  const auto r = play(s, {}, leo_tx);
  ASSERT_EQ(r.sums.size(), 3u);
  for (size_t i = 0; i < r.sums.size(); ++i) {
    EXPECT_NEAR(static_cast<double>(r.sums[i].measured_sum - geometric_sum(s, s.gnss[i])), 0.0, 1e-9);
    EXPECT_EQ(r.sums[i].leo_id, 1000);
    EXPECT_EQ(r.sums[i].sat_id, s.gnss[i].id);
  }
}

TEST(Protocol, GnssAfterLeoGivesSameSums) {
  Scene s;
  const Seconds leo_tx = static_cast<Seconds>(1.2e6) / kC;
  const auto sync = play(s, {}, leo_tx);
  const auto late = play(s, {}, leo_tx + 5e-3L);
  for (size_t i = 0; i < sync.sums.size(); ++i)
    EXPECT_NEAR(static_cast<double>(late.sums[i].measured_sum - sync.sums[i].measured_sum), 0.0, 1e-9);
}

TEST(Protocol, ProcessingDelayAndUeBiasCancel) {
  Scene s;
  const auto ref = play(s, {}, 0);
  const auto r = play(s, {}, 0, 0.0123L, 2e-4L);
  for (size_t i = 0; i < r.sums.size(); ++i)
    EXPECT_NEAR(static_cast<double>(r.sums[i].measured_sum - ref.sums[i].measured_sum), 0.0, 1e-9);
}

TEST(Protocol, BackwardDelayCancelsForwardAdds) {
  Scene s;
  const auto ref = play(s, {}, 0);
  for (Seconds db : {1e-4L, 1e-3L, 1e-2L}) {
    AttackScript a;
    a.backward_delay = db;
    const auto r = play(s, a, 0);
    for (size_t i = 0; i < r.sums.size(); ++i)
      EXPECT_LE(std::fabs(r.sums[i].measured_sum - ref.sums[i].measured_sum), 1e-9L);
    AttackScript f;
    f.forward_delay = db;
    const auto g = play(s, f, 0);
    for (size_t i = 0; i < g.sums.size(); ++i)
      EXPECT_LE(std::fabs(g.sums[i].measured_sum - ref.sums[i].measured_sum - kC * db), 1e-9L);
  }
}

// No non-negative script can shrink any sum below its benign value.
TEST(Protocol, SumMonotonicityOverRandomScripts) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Snapshot snap = synthetic_snapshot(rng(), 5, 1 + static_cast<int>(rng() % 2));
    SessionOptions opt;
    opt.seed = rng();
    opt.gnss_sigma_m = 30.0 * u(rng);
    opt.leo_sigma_m = 5.0 * u(rng);
    opt.ue_clock_bias = static_cast<Seconds>(0.01 * (u(rng) - 0.5));
    const Session benign = run_session(snap, {}, opt);
    AttackScript a;
    a.forward_delay = static_cast<Seconds>(u(rng) < 0.5 ? 0.0 : 1e-3 * u(rng));
    a.backward_delay = static_cast<Seconds>(1e-2 * u(rng));
    for (const auto& g : snap.gnss)
      if (u(rng) < 0.6) a.gnss_delays[g.id] = static_cast<Seconds>(1e-3 * u(rng));
    const Session attacked = run_session(snap, a, opt);
    ASSERT_EQ(attacked.sums.size(), benign.sums.size());
    for (size_t k = 0; k < benign.sums.size(); ++k)
      ASSERT_GE(attacked.sums[k].measured_sum, benign.sums[k].measured_sum - 1e-9L) << "case " << i;
  }
}

TEST(Protocol, TransmitShiftNeutrality) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 50; ++i) {
    const Snapshot snap = synthetic_snapshot(rng(), 4, 2);
    SessionOptions opt;
    const Session ref = run_session(snap, {}, opt);
    opt.gnss_transmit_offset = static_cast<Seconds>((rng() % 1000) * 1e-5);
    const Session shifted = run_session(snap, {}, opt);
    for (size_t k = 0; k < ref.sums.size(); ++k)
      EXPECT_LE(std::fabs(shifted.sums[k].measured_sum - ref.sums[k].measured_sum), 1e-9L);
  }
}

TEST(Protocol, UnauthenticatedResponseRefused) {
  Scene s;
  auto r = play(s, {}, 0);
  r.ex.response.authenticated = false;
  try {
    form_sums(r.ex.exchange, r.ex.response, r.broadcasts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unauthenticated_response);
  }
}

TEST(Protocol, StaleReferenceRejected) {
  Scene s;
  ClockModel ue{ClockId::ue};
  ClockModel leo{ClockId::leo};
  const auto ex = run_exchange(s.ue, s.leo, ue, leo, {}, 1.0L);
  NoiseStream quiet({0.0, 1});
  const auto plans = schedule_broadcasts(s.gnss, 0);
  const auto b = receive_broadcasts(s.ue, ue, plans, {}, quiet);
  try {
    form_sums(ex.exchange, ex.response, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::stale_reference);
  }
}

TEST(Protocol, KeyWindow) {
  LeoResponse resp;
  resp.transmit_time_global = 100;
  GnssBroadcast b;
  KeyWindowPolicy policy;  // 30 s
  b.transmit_time = 100.005L;
  EXPECT_TRUE(check_key_window(resp, b, policy));
  b.transmit_time = 90;
  EXPECT_TRUE(check_key_window(resp, b, policy));
  b.transmit_time = 40;
  EXPECT_FALSE(check_key_window(resp, b, policy));
}

TEST(Protocol, LooseSync) {
  Scene s;
  ConstellationSpec spec;
  spec.name = "leo";
  spec.total_satellites = 1;
  spec.altitude_m = 1200e3;
  const Seconds tau_max = static_cast<Seconds>(max_tof_bound(spec, 0.0));
  const auto benign = play(s, {}, 0);
  EXPECT_TRUE(loose_sync_check(benign.ex.exchange, tau_max));
  AttackScript a;
  a.forward_delay = 15e-3L;
  a.backward_delay = 15e-3L;
  const auto attacked = play(s, a, 0);
  EXPECT_FALSE(loose_sync_check(attacked.ex.exchange, tau_max));
  // Boundary inclusive.
  const Seconds tof = two_way_tof(benign.ex.exchange);
  EXPECT_TRUE(loose_sync_check(benign.ex.exchange, tof, 0));
  EXPECT_FALSE(loose_sync_check(benign.ex.exchange, tof - 1e-9L, 0));
}
