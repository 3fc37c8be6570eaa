#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "trick/errors.hpp"
#include "trick/experiments.hpp"
#include "trick/solvers.hpp"

using namespace trick;

namespace {

std::vector<RangeMeasurement> exact_ranges(const EcefVector& truth, const std::vector<EcefVector>& sats) {
  std::vector<RangeMeasurement> out;
  for (size_t i = 0; i < sats.size(); ++i) out.push_back({static_cast<SatId>(i), sats[i], (sats[i] - truth).norm()});
  return out;
}

std::vector<SumConstraint> exact_sums(const EcefVector& truth, const EcefVector& leo,
                                      const std::vector<SatelliteState>& gnss) {
  std::vector<SumConstraint> out;
  for (const auto& g : gnss)
    out.push_back({1000, g.id, leo, g.position,
                   static_cast<long double>((g.position - truth).norm()) +
                       static_cast<long double>((leo - truth).norm())});
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

}  // namespace

TEST(Solvers, TetrahedronRecovery) {
  const EcefVector truth(6.37e6, 1.0e5, -2.0e5);
  const double s = 2.0e7;
  const std::vector<EcefVector> sats{truth + EcefVector(s, s, s), truth + EcefVector(s, -s, -s),
                                     truth + EcefVector(-s, s, -s), truth + EcefVector(-s, -s, s)};
  SolverConfig cfg;
  cfg.initial_guess = EcefVector(6.0e6, 0, 0);
  const auto sol = spherical_multilaterate(exact_ranges(truth, sats), cfg);
  EXPECT_TRUE(sol.converged);
  EXPECT_LT((sol.position - truth).norm(), 1e-3);
  EXPECT_LT(sol.max_abs_residual(), 1e-3);
}

TEST(Solvers, UniformInflationMovesAlongAxis) {
  // Four satellites in a ring around the z axis plus one at the zenith.
  const EcefVector truth(0, 0, 6.4e6);
  std::vector<EcefVector> sats{truth + EcefVector(0, 0, 2e7)};
  for (int k = 0; k < 4; ++k) {
    const double az = k * 3.14159265358979 / 2;
    sats.push_back(truth + 2e7 * EcefVector(std::cos(az) * 0.7, std::sin(az) * 0.7, 0.7));
  }
  auto ranges = exact_ranges(truth, sats);
  for (auto& r : ranges) r.range_m += 500.0;
  SolverConfig cfg;
  cfg.initial_guess = truth + EcefVector(3, -2, 1);
  const auto sol = spherical_multilaterate(ranges, cfg);
  EXPECT_LT(std::hypot(sol.position.x(), sol.position.y()), 1e-3);
  EXPECT_GT(std::abs(sol.position.z() - truth.z()), 100.0);
  double norm = 0.0;
  for (double r : sol.residuals) norm += r * r;
  EXPECT_GT(std::sqrt(norm), 1.0);
}

TEST(Solvers, TwoSatellitesDegenerate) {
  const EcefVector truth(6.4e6, 0, 0);
  const auto ranges = exact_ranges(truth, {EcefVector(2e7, 1e7, 0), EcefVector(2e7, -1e7, 0)});
  try {
    spherical_multilaterate(ranges);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_geometry);
  }
}

TEST(Solvers, CollinearSatellitesDegenerate) {
  const EcefVector truth(6.4e6, 0, 0);
  // All on one line through the receiver: the normal matrix has rank one.
  std::vector<EcefVector> sats;
  for (double k : {1.0, 2.0, 3.0, 4.0}) sats.push_back(truth + k * EcefVector(1e7, 0, 0));
  SolverConfig cfg;
  cfg.initial_guess = truth;
  EXPECT_THROW(spherical_multilaterate(exact_ranges(truth, sats), cfg), Error);
}

TEST(Solvers, NonPositiveRangeRejected) {
  std::vector<RangeMeasurement> r{{1, {2e7, 0, 0}, 0.0}, {2, {0, 2e7, 0}, 1e7}, {3, {0, 0, 2e7}, 1e7}};
  EXPECT_THROW(spherical_multilaterate(r), Error);
}

TEST(Solvers, EllipsoidRoundTrip) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Snapshot snap = synthetic_snapshot(seed, 6, 1);
    const auto sums = exact_sums(snap.ue, snap.leo_anchors[0].position, snap.gnss);
    const auto sol = ellipsoidal_multilaterate(sums);
    EXPECT_LT((sol.position - snap.ue).norm(), 1e-3) << "seed " << seed;
  }
}

TEST(Solvers, EllipsoidRequiresSumAboveSeparation) {
  const Snapshot snap = synthetic_snapshot(3, 4, 1);
  auto sums = exact_sums(snap.ue, snap.leo_anchors[0].position, snap.gnss);
  sums[1].measured_sum = static_cast<long double>(sums[1].foci_separation()) - 1.0L;
  try {
    ellipsoidal_multilaterate(sums);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
}

// Central differences of the sum-of-distances, computed here without the
// library's residual code.
TEST(Solvers, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 1.0);
  const double h = 0.1;
  for (int trial = 0; trial < 100; ++trial) {
    const Snapshot snap = synthetic_snapshot(rng(), 5, 1);
    const auto sums = exact_sums(snap.ue, snap.leo_anchors[0].position, snap.gnss);
    const EcefVector r = snap.ue + 5e4 * EcefVector(n(rng), n(rng), n(rng));
    const Eigen::MatrixX3d jac = ellipsoid_jacobian(sums, r);
    for (size_t i = 0; i < sums.size(); ++i) {
      auto f = [&](const EcefVector& p) {
        return (sums[i].gnss_position - p).norm() + (sums[i].leo_position - p).norm();
      };
      Eigen::RowVector3d fd;
      for (int k = 0; k < 3; ++k) {
        EcefVector up = r, down = r;
        up(k) += h;
        down(k) -= h;
        fd(k) = (f(up) - f(down)) / (2 * h);
      }
      const Eigen::RowVector3d row = jac.row(static_cast<Eigen::Index>(i));
      EXPECT_LT((fd - row).norm() / row.norm(), 1e-6);
    }
  }
}

TEST(Solvers, JacobianAtFocusThrows) {
  const Snapshot snap = synthetic_snapshot(5, 3, 1);
  const auto sums = exact_sums(snap.ue, snap.leo_anchors[0].position, snap.gnss);
  try {
    ellipsoid_jacobian(sums, snap.leo_anchors[0].position);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::focus_coincidence);
  }
}

TEST(Solvers, StartingOnFocusIsPerturbedAway) {
  const Snapshot snap = synthetic_snapshot(9, 6, 1);
  const auto sums = exact_sums(snap.ue, snap.leo_anchors[0].position, snap.gnss);
  SolverConfig cfg;
  cfg.initial_guess = snap.leo_anchors[0].position;
  const auto sol = ellipsoidal_multilaterate(sums, cfg);
  EXPECT_LT((sol.position - snap.ue).norm(), 1e-3);
}

TEST(Solvers, TranslationEquivariance) {
  const EcefVector shift(1.5e5, -2.0e5, 3.0e5);
  for (std::uint64_t seed = 40; seed < 60; ++seed) {
    const Snapshot snap = synthetic_snapshot(seed, 6, 1);
    // Ranges perturbed so the answer is a genuine least-squares compromise.
    auto ranges = exact_ranges(snap.ue, [&] {
      std::vector<EcefVector> v;
      for (const auto& g : snap.gnss) v.push_back(g.position);
      return v;
    }());
    for (size_t i = 0; i < ranges.size(); ++i) ranges[i].range_m += 40.0 * std::sin(3.0 * i + seed);
    auto moved = ranges;
    for (auto& m : moved) m.sat_position += shift;
    SolverConfig a, b;
    a.initial_guess = snap.ue + EcefVector(1e4, 1e4, 1e4);
    b.initial_guess = *a.initial_guess + shift;
    const auto sa = spherical_multilaterate(ranges, a);
    const auto sb = spherical_multilaterate(moved, b);
    EXPECT_LT((sb.position - sa.position - shift).norm(), 1e-3);
  }
}

TEST(Solvers, MedianErrorGrowsWithNoise) {
  std::vector<double> medians;
  for (double sigma : {10.0, 50.0, 100.0}) {
    std::vector<double> errors;
    std::mt19937_64 rng(77);
    std::normal_distribution<double> n(0.0, sigma);
    for (int trial = 0; trial < 200; ++trial) {
      const Snapshot snap = synthetic_snapshot(1000 + trial, 8, 1);
      std::vector<EcefVector> sats;
      for (const auto& g : snap.gnss) sats.push_back(g.position);
      auto ranges = exact_ranges(snap.ue, sats);
      for (auto& r : ranges) r.range_m += n(rng);
      errors.push_back((spherical_multilaterate(ranges).position - snap.ue).norm());
    }
    medians.push_back(median(errors));
  }
  EXPECT_LT(medians[0], medians[1]);
  EXPECT_LT(medians[1], medians[2]);
}

TEST(Solvers, RangeBiasMode) {
  const Snapshot snap = synthetic_snapshot(12, 7, 1);
  std::vector<EcefVector> sats;
  for (const auto& g : snap.gnss) sats.push_back(g.position);
  auto ranges = exact_ranges(snap.ue, sats);
  for (auto& r : ranges) r.range_m += 12345.0;
  SolverConfig cfg;
  cfg.estimate_range_bias = true;
  const auto sol = spherical_multilaterate(ranges, cfg);
  EXPECT_LT((sol.position - snap.ue).norm(), 1e-3);
  EXPECT_NEAR(sol.range_bias_m, 12345.0, 1e-3);
}

TEST(Solvers, SurfaceMode) {
  const GeodeticPoint where{47.3769, 8.5417, 400.0};
  const EcefVector truth = geodetic_to_ecef(where);
  const Snapshot snap = synthetic_snapshot(6, 3, 1);
  // Re-center the synthetic sky on the chosen point by reusing its directions.
  std::vector<SatelliteState> gnss;
  const Eigen::Matrix3d rot = enu_basis(where) * enu_basis(ecef_to_geodetic(snap.ue)).transpose();
  for (const auto& g : snap.gnss) gnss.push_back({g.id, truth + rot * (g.position - snap.ue)});
  const EcefVector leo = truth + rot * (snap.leo_anchors[0].position - snap.ue);
  const auto sums = exact_sums(truth, leo, gnss);
  SolverConfig cfg;
  cfg.fixed_altitude_m = 400.0;
  const auto sol = ellipsoidal_multilaterate(sums, cfg);
  EXPECT_LT((sol.position - truth).norm(), 1e-3);
  EXPECT_NEAR(ecef_to_geodetic(sol.position).altitude_m, 400.0, 1e-6);
}

TEST(Solvers, NonConvergenceThrowsOrReports) {
  const Snapshot snap = synthetic_snapshot(2, 6, 1);
  const auto sums = exact_sums(snap.ue, snap.leo_anchors[0].position, snap.gnss);
  SolverConfig cfg;
  cfg.max_iterations = 1;
  try {
    ellipsoidal_multilaterate(sums, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_convergence);
  }
  cfg.throw_on_nonconvergence = false;
  const auto sol = ellipsoidal_multilaterate(sums, cfg);
  EXPECT_FALSE(sol.converged);
  EXPECT_EQ(sol.iterations, 1);
}

TEST(Solvers, ConvergedMeansSmallFinalStep) {
  for (std::uint64_t seed = 200; seed < 230; ++seed) {
    const Snapshot snap = synthetic_snapshot(seed, 5, 1);
    const auto sol = ellipsoidal_multilaterate(exact_sums(snap.ue, snap.leo_anchors[0].position, snap.gnss));
    EXPECT_TRUE(sol.converged);
    EXPECT_LT(sol.final_step_m, SolverConfig{}.convergence_tol);
  }
}

TEST(Solvers, BadConfigRejected) {
  SolverConfig cfg;
  cfg.convergence_tol = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Solvers, AutoGuessOnSurface) {
  const std::vector<EcefVector> sats{{2e7, 1e6, 0}, {2e7, -1e6, 0}};
  const EcefVector g = auto_initial_guess(sats);
  EXPECT_NEAR(g.norm(), 6371e3, 1e-6);
  EXPECT_NEAR(g.normalized().x(), 1.0, 1e-12);
}
