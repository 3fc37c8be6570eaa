#include "trick/solvers.hpp"

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "trick/constants.hpp"
#include "trick/errors.hpp"

namespace trick {
namespace {

constexpr double kFocusRadius = 1e-3;  // m
constexpr double kRankTolerance = 1e-12;
constexpr int kMaxPerturbations = 16;

struct FocusHit {};

// Maps the free parameters to (position, range bias).
struct Model {
  int parameters = 3;
  std::function<EcefVector(const Eigen::VectorXd&)> position;
  std::function<Eigen::Matrix3Xd(const Eigen::VectorXd&)> position_jacobian;  // d position / d params
  bool with_bias = false;
};

// Residual and Jacobian with respect to (position, bias) for a given position.
using Evaluate = std::function<void(const EcefVector& r, double bias, Eigen::VectorXd& f, Eigen::MatrixXd& j)>;

Model free_model(bool with_bias) {
  Model m;
  m.with_bias = with_bias;
  m.parameters = with_bias ? 4 : 3;
  m.position = [](const Eigen::VectorXd& x) { return EcefVector(x.head<3>()); };
  m.position_jacobian = [](const Eigen::VectorXd&) { return Eigen::Matrix3Xd(Eigen::Matrix3d::Identity()); };
  return m;
}

Model surface_model(const EcefVector& origin, double altitude_m) {
  const GeodeticPoint g = ecef_to_geodetic(origin);
  const Eigen::Matrix3d enu = enu_basis(g);
  auto to_position = [origin, enu, altitude_m](const Eigen::VectorXd& x) {
    const EcefVector q = origin + enu.col(0) * x(0) + enu.col(1) * x(1);
    GeodeticPoint p = ecef_to_geodetic(q);
    p.altitude_m = altitude_m;
    return geodetic_to_ecef(p);
  };
  Model m;
  m.parameters = 2;
  m.position = to_position;
  m.position_jacobian = [to_position](const Eigen::VectorXd& x) {
    constexpr double h = 1.0;
    Eigen::Matrix3Xd d(3, 2);
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXd up = x, down = x;
      up(k) += h;
      down(k) -= h;
      d.col(k) = (to_position(up) - to_position(down)) / (2.0 * h);
    }
    return d;
  };
  return m;
}

PositionSolution levenberg_marquardt(const Model& model, Eigen::VectorXd x, int rows, const Evaluate& evaluate,
                                     const SolverConfig& cfg) {
  if (rows < model.parameters)
    throw Error(ErrorCode::degenerate_geometry, std::to_string(rows) + " constraints cannot determine " +
                                                    std::to_string(model.parameters) + " unknowns");

  std::mt19937_64 rng(cfg.perturbation_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  int perturbations = 0;

  Eigen::VectorXd f(rows);
  Eigen::MatrixXd j(rows, model.parameters);
  Eigen::VectorXd f_pos(rows);
  Eigen::MatrixXd j_pos(rows, model.with_bias ? 4 : 3);

  auto eval_at = [&](const Eigen::VectorXd& p, Eigen::VectorXd& f_out, Eigen::MatrixXd& j_out) {
    const EcefVector r = model.position(p);
    const double bias = model.with_bias ? p(3) : 0.0;
    evaluate(r, bias, f_pos, j_pos);
    f_out = f_pos;
    const Eigen::Matrix3Xd dp = model.position_jacobian(p);
    j_out.leftCols(dp.cols()) = j_pos.leftCols<3>() * dp;
    if (model.with_bias) j_out.col(3) = j_pos.col(3);
  };

  auto perturb = [&](Eigen::VectorXd& p) {
    if (++perturbations > kMaxPerturbations)
      throw Error(ErrorCode::focus_coincidence, "iterate repeatedly landed on a focus");
    Eigen::Vector3d dir(normal(rng), normal(rng), normal(rng));
    dir.normalize();
    const int n = std::min(3, model.parameters);
    p.head(n) += dir.head(n);
  };

  // Evaluate at x, nudging it off any focus it sits on.
  auto settle = [&](Eigen::VectorXd& p) {
    for (;;) {
      try {
        eval_at(p, f, j);
        return;
      } catch (const FocusHit&) {
        perturb(p);
      }
    }
  };
  settle(x);

  double lambda = cfg.damping_init;
  double cost = 0.5 * f.squaredNorm();
  PositionSolution sol;

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    const Eigen::MatrixXd a = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * f;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
    const double max_ev = eig.eigenvalues().maxCoeff();
    if (!(max_ev > 0.0) || eig.eigenvalues().minCoeff() <= kRankTolerance * max_ev)
      throw Error(ErrorCode::degenerate_geometry, "normal equations are rank deficient");

    Eigen::MatrixXd damped = a;
    damped.diagonal() += lambda * a.diagonal();
    const Eigen::VectorXd step = damped.ldlt().solve(-g);
    const double step_size = step.cwiseAbs().maxCoeff();

    Eigen::VectorXd candidate = x + step;
    Eigen::VectorXd f_new(rows);
    Eigen::MatrixXd j_new(rows, model.parameters);
    try {
      eval_at(candidate, f_new, j_new);
    } catch (const FocusHit&) {
      perturb(x);
      lambda *= 10.0;
      settle(x);
      cost = 0.5 * f.squaredNorm();
      continue;
    }
    const double new_cost = 0.5 * f_new.squaredNorm();

    sol.iterations = iter;
    sol.final_step_m = step_size;
    if (new_cost <= cost) {
      x = candidate;
      f = f_new;
      j = j_new;
      cost = new_cost;
      lambda = std::max(lambda / 10.0, 1e-15);
    } else {
      lambda *= 10.0;
    }
    if (step_size < cfg.convergence_tol) {
      sol.converged = true;
      break;
    }
  }

  sol.position = model.position(x);
  sol.range_bias_m = model.with_bias ? x(3) : 0.0;
  sol.residuals.assign(f.data(), f.data() + f.size());
  if (!sol.converged && cfg.throw_on_nonconvergence)
    throw Error(ErrorCode::non_convergence,
                "no convergence after " + std::to_string(cfg.max_iterations) + " iterations");
  return sol;
}

Eigen::VectorXd initial_parameters(const Model& model, const EcefVector& start) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(model.parameters);
  if (model.parameters >= 3) x.head<3>() = start;
  return x;
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iterations < 1 || !(convergence_tol > 0.0) || !(damping_init > 0.0))
    throw Error(ErrorCode::invalid_argument, "solver iterations, tolerance and damping must be positive");
}

double PositionSolution::max_abs_residual() const {
  double m = 0.0;
  for (double r : residuals) m = std::max(m, std::abs(r));
  return m;
}

EcefVector auto_initial_guess(std::span<const EcefVector> sat_positions) {
  EcefVector sum = EcefVector::Zero();
  for (const auto& s : sat_positions) sum += s.normalized();
  if (sum.norm() < 1e-9) {
    if (sat_positions.empty()) return EcefVector(kEarthMeanRadius, 0.0, 0.0);
    sum = sat_positions.front().normalized();
  }
  return sum.normalized() * kEarthMeanRadius;
}

Eigen::VectorXd ellipsoid_residuals(std::span<const SumConstraint> constraints, const EcefVector& r) {
  Eigen::VectorXd f(static_cast<Eigen::Index>(constraints.size()));
  for (size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    const long double geometric = static_cast<long double>((c.gnss_position - r).norm()) +
                                  static_cast<long double>((c.leo_position - r).norm());
    f(static_cast<Eigen::Index>(i)) = static_cast<double>(geometric - c.measured_sum);
  }
  return f;
}

Eigen::MatrixX3d ellipsoid_jacobian(std::span<const SumConstraint> constraints, const EcefVector& r) {
  Eigen::MatrixX3d jac(static_cast<Eigen::Index>(constraints.size()), 3);
  for (size_t i = 0; i < constraints.size(); ++i) {
    const EcefVector dg = r - constraints[i].gnss_position;
    const EcefVector dl = r - constraints[i].leo_position;
    if (dg.norm() < kFocusRadius || dl.norm() < kFocusRadius)
      throw Error(ErrorCode::focus_coincidence, "Jacobian undefined at a focus");
    jac.row(static_cast<Eigen::Index>(i)) = (dg.normalized() + dl.normalized()).transpose();
  }
  return jac;
}

PositionSolution spherical_multilaterate(std::span<const RangeMeasurement> pseudoranges, const SolverConfig& cfg) {
  cfg.validate();
  for (const auto& m : pseudoranges)
    if (!(m.range_m > 0.0)) throw Error(ErrorCode::invalid_argument, "pseudoranges must be positive");

  std::vector<EcefVector> sats;
  for (const auto& m : pseudoranges) sats.push_back(m.sat_position);
  const EcefVector start = cfg.initial_guess.value_or(auto_initial_guess(sats));

  const Model model = cfg.fixed_altitude_m ? surface_model(start, *cfg.fixed_altitude_m)
                                           : free_model(cfg.estimate_range_bias);
  const Evaluate evaluate = [&](const EcefVector& r, double bias, Eigen::VectorXd& f, Eigen::MatrixXd& j) {
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      const auto& m = pseudoranges[static_cast<size_t>(i)];
      const EcefVector d = r - m.sat_position;
      const double range = d.norm();
      if (range < kFocusRadius) throw FocusHit{};
      f(i) = range + bias - m.range_m;
      j.row(i).head<3>() = (d / range).transpose();
      if (j.cols() > 3) j(i, 3) = 1.0;
    }
  };
  return levenberg_marquardt(model, initial_parameters(model, start), static_cast<int>(pseudoranges.size()),
                             evaluate, cfg);
}

PositionSolution ellipsoidal_multilaterate(std::span<const SumConstraint> constraints, const SolverConfig& cfg) {
  cfg.validate();
  for (const auto& c : constraints) {
    if (!std::isfinite(static_cast<double>(c.measured_sum)) ||
        !(c.measured_sum > static_cast<long double>(c.foci_separation())))
      throw Error(ErrorCode::invalid_argument,
                  "sum constraint for satellite " + std::to_string(c.sat_id) + " is not larger than its foci separation");
  }
  std::vector<EcefVector> gnss;
  for (const auto& c : constraints) gnss.push_back(c.gnss_position);
  const EcefVector start = cfg.initial_guess.value_or(auto_initial_guess(gnss));

  const Model model = cfg.fixed_altitude_m ? surface_model(start, *cfg.fixed_altitude_m) : free_model(false);
  const Evaluate evaluate = [&](const EcefVector& r, double, Eigen::VectorXd& f, Eigen::MatrixXd& j) {
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      const auto& c = constraints[static_cast<size_t>(i)];
      const EcefVector dg = r - c.gnss_position;
      const EcefVector dl = r - c.leo_position;
      const double ng = dg.norm();
      const double nl = dl.norm();
      if (ng < kFocusRadius || nl < kFocusRadius) throw FocusHit{};
      f(i) = static_cast<double>(static_cast<long double>(ng) + static_cast<long double>(nl) - c.measured_sum);
      j.row(i).head<3>() = (dg / ng + dl / nl).transpose();
    }
  };
  return levenberg_marquardt(model, initial_parameters(model, start), static_cast<int>(constraints.size()), evaluate,
                             cfg);
}

}  // namespace trick
