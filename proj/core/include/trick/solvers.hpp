#pragma once

// Damped Gauss-Newton position solvers.
//
//  * spherical_multilaterate: ||s_i - r|| (+ b) = rho_i. The clock-corrected
//    victim receiver solves position only; the 4-unknown mode adds a range
//    bias b.
//  * ellipsoidal_multilaterate: ||g_i - r|| + ||l_i - r|| = S_i.
//
// Damping is Marquardt-scaled and adapted x10 / /10 on rejected / accepted
// steps. An optional fixed altitude reduces either problem to two unknowns
// in the local tangent plane.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "trick/geodesy.hpp"
#include "trick/orbits.hpp"
#include "trick/protocol.hpp"

namespace trick {

struct SolverConfig {
  int max_iterations = 100;
  double convergence_tol = 1e-4;  // meters, max |step|
  double damping_init = 1e-3;
  std::optional<EcefVector> initial_guess;  // nullopt = auto
  bool estimate_range_bias = false;         // spherical only: 4 unknowns
  std::optional<double> fixed_altitude_m;   // surface-constrained mode
  bool throw_on_nonconvergence = true;
  std::uint64_t perturbation_seed = 0x7269636b;

  void validate() const;
};

struct PositionSolution {
  EcefVector position = EcefVector::Zero();
  std::vector<double> residuals;  // f_i at the solution, meters
  int iterations = 0;
  bool converged = false;
  double range_bias_m = 0.0;  // ranges = geometric + range_bias_m
  double final_step_m = 0.0;

  double max_abs_residual() const;
};

struct RangeMeasurement {
  SatId sat_id = 0;
  EcefVector sat_position = EcefVector::Zero();
  double range_m = 0.0;
};

/// Throws DegenerateGeometry (too few or rank-deficient constraints) and
/// NonConvergence (unless disabled in the config).
PositionSolution spherical_multilaterate(std::span<const RangeMeasurement> pseudoranges, const SolverConfig& cfg = {});
PositionSolution ellipsoidal_multilaterate(std::span<const SumConstraint> constraints, const SolverConfig& cfg = {});

/// Normalized centroid of the satellites' directions scaled to the mean
/// Earth radius.
EcefVector auto_initial_guess(std::span<const EcefVector> sat_positions);

/// f_i(r) = ||g_i - r|| + ||l_i - r|| - S_i
Eigen::VectorXd ellipsoid_residuals(std::span<const SumConstraint> constraints, const EcefVector& r);
/// Rows unit(r - g_i) + unit(r - l_i). Throws FocusCoincidence at a focus.
Eigen::MatrixX3d ellipsoid_jacobian(std::span<const SumConstraint> constraints, const EcefVector& r);

}  // namespace trick
