#include <cmath>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "trick/attacks.hpp"
#include "trick/constants.hpp"
#include "trick/experiments.hpp"
#include "trick/solvers.hpp"

namespace trick::cli {
namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

CheckLine delay_algebra(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const Snapshot snap = synthetic_snapshot(rng(), 1, 1);
    ClockModel ue{ClockId::ue, static_cast<Seconds>(0.01 * (u(rng) - 0.5)), 0.0, 0};
    ClockModel leo{ClockId::leo, 0, 0.0, 0};
    AttackScript s;
    s.forward_delay = static_cast<Seconds>(1e-3 * u(rng));
    s.backward_delay = static_cast<Seconds>(1e-3 * u(rng));
    const auto out = run_exchange(snap.ue, snap.leo_anchors[0], ue, leo, s, 0);
    const Seconds tau = static_cast<Seconds>((snap.ue - snap.leo_anchors[0].position).norm()) /
                        static_cast<Seconds>(kSpeedOfLight);
    const Seconds delta = leo.bias - ue.bias;
    worst = std::max(worst, std::fabs(two_way_tof(out.exchange) - (tau + (s.forward_delay + s.backward_delay) / 2)));
    worst = std::max(worst, std::fabs(two_way_offset(out.exchange) - (delta + (s.forward_delay - s.backward_delay) / 2)));
  }
  return {"delay-algebra", worst <= 1e-12L, "max error " + fmt(static_cast<double>(worst)) + " s"};
}

CheckLine sum_monotonicity(std::uint64_t seed, CheckLine* cancellation) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_drop = 0.0, worst_cancel = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Snapshot snap = synthetic_snapshot(rng(), 5, 2);
    SessionOptions opt;
    opt.seed = rng();
    opt.gnss_sigma_m = 20.0;
    const Session benign = run_session(snap, {}, opt);
    AttackScript s;
    s.forward_delay = static_cast<Seconds>(u(rng) < 0.5 ? 0.0 : 1e-4 * u(rng));
    s.backward_delay = static_cast<Seconds>(1e-3 * u(rng));
    for (const auto& g : snap.gnss)
      if (u(rng) < 0.7) s.gnss_delays[g.id] = static_cast<Seconds>(1e-4 * u(rng));
    const Session attacked = run_session(snap, s, opt);
    AttackScript backward_only;
    backward_only.backward_delay = s.backward_delay;
    const Session cancelled = run_session(snap, backward_only, opt);
    for (std::size_t k = 0; k < benign.sums.size(); ++k) {
      worst_drop = std::max(worst_drop, static_cast<double>(benign.sums[k].measured_sum - attacked.sums[k].measured_sum));
      worst_cancel = std::max(
          worst_cancel, static_cast<double>(std::fabs(benign.sums[k].measured_sum - cancelled.sums[k].measured_sum)));
    }
  }
  *cancellation = {"backward-cancellation", worst_cancel <= 1e-9, "max change " + fmt(worst_cancel) + " m"};
  return {"sum-monotonicity", worst_drop <= 1e-9, "largest decrease " + fmt(worst_drop) + " m"};
}

CheckLine solver_round_trip(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Snapshot snap = synthetic_snapshot(rng(), 6, 1);
    SessionOptions opt;
    opt.seed = rng();
    const Session s = run_session(snap, {}, opt);
    const auto sol = ellipsoidal_multilaterate(s.sums);
    worst = std::max(worst, (sol.position - snap.ue).norm());
  }
  return {"solver-round-trip", worst <= 1e-3, "max position error " + fmt(worst) + " m"};
}

CheckLine jacobian(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Snapshot snap = synthetic_snapshot(rng(), 6, 1);
    const Session s = run_session(snap, {}, {});
    const EcefVector r = snap.ue + EcefVector(n(rng), n(rng), n(rng)) * 5e4;
    const Eigen::MatrixX3d j = ellipsoid_jacobian(s.sums, r);
    Eigen::MatrixX3d fd(j.rows(), 3);
    for (int axis = 0; axis < 3; ++axis) {
      EcefVector h = EcefVector::Zero();
      h(axis) = 0.1;
      fd.col(axis) = (ellipsoid_residuals(s.sums, r + h) - ellipsoid_residuals(s.sums, r - h)) / 0.2;
    }
    for (Eigen::Index k = 0; k < j.rows(); ++k)
      worst = std::max(worst, (fd.row(k) - j.row(k)).norm() / j.row(k).norm());
  }
  return {"jacobian", worst <= 1e-6, "max relative error " + fmt(worst)};
}

}  // namespace

std::vector<CheckLine> selfcheck(unsigned long long seed) {
  std::vector<CheckLine> out;
  out.push_back(delay_algebra(derive_seed(seed, 1)));
  CheckLine cancel;
  out.push_back(sum_monotonicity(derive_seed(seed, 2), &cancel));
  out.push_back(cancel);
  out.push_back(solver_round_trip(derive_seed(seed, 3)));
  out.push_back(jacobian(derive_seed(seed, 4)));
  return out;
}

}  // namespace trick::cli
