#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "bvpsens/sens.hpp"
#include "bvpsens/shoot.hpp"

namespace bvpsens {

struct OracleOptions {
  /// Central-difference step; 0 means 1e-3 * max(1, |datum|).
  double h0 = 0.0;
  Tolerances ivp_tol{};
  QuadratureRule quad{};
  int grid_points = 101;
  double tol_rel = 1e-5;
  double bc_tol = 1e-8;
  bool printed_cd_signs = false;
  int max_iterations = 50;
};

/// Finite-difference sensitivity of u with respect to one datum, sampled on
/// the grid: central differences at h0 and h0/2 combined by one Richardson
/// level. Perturbed problems are re-solved from the base solution's
/// unknowns. Throws PerturbationInfeasible when a perturbation would break
/// the ordering constraints.
Eigen::VectorXd fd_sensitivity(const ValidatedProblem& vp, const DatumId& id,
                               const std::vector<double>& grid, double h0,
                               const OracleOptions& opts = {});

struct DatumCheck {
  DatumId id;
  double sup_abs = 0.0;       // sup |Z - fd| on the grid
  double sup_rel = 0.0;       // sup_abs / max(1, sup |Z|)
  double bc_residual = 0.0;   // ||L(Z) - target||_inf
  bool pass = false;
};

struct VerificationReport {
  std::vector<DatumCheck> rows;
  bool pass = false;
  double tol_rel = 0.0;
  double bc_tol = 0.0;
};

/// Compare every variational sensitivity against its finite-difference
/// counterpart and re-check its boundary values against the target vector.
VerificationReport verify(const ValidatedProblem& vp,
                          const OracleOptions& opts = {});

/// Sup-norm residual over the span of the identity
///   d u / d x0 (x) = -sum_{i=0}^{n-1} u^(i+1)(x0) alpha_i(x)
/// for the initial value problem y^(n) = f with y^(i)(x0) = c0_i, where the
/// left side is a Richardson-extrapolated central difference and u^(n)(x0)
/// is computed from f.
double peano_check(int n, const Expr& f, double x0, const Eigen::VectorXd& c0,
                   double span_lo, double span_hi,
                   const OracleOptions& opts = {});

struct SweepCell {
  DatumId id;
  double delta = 0.0;
  double sup_deviation = 0.0;   // max over orders 0..n-1 and the grid
  double ratio_to_prev = 0.0;   // previous deviation / this one; NaN first
  bool ok = false;
  std::string note;             // failure reason when !ok
};

struct ContinuityReport {
  std::vector<SweepCell> cells;  // datum-major, deltas in given order
};

/// Perturb each datum by +delta, re-solve, and record the uniform deviation
/// of u^(i), i = 0..n-1, over [x_1, d]. Infeasible or failed cells are
/// recorded, not fatal.
ContinuityReport sweep(const ValidatedProblem& vp,
                       const std::vector<double>& deltas,
                       const OracleOptions& opts = {});

}  // namespace bvpsens
