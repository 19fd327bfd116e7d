#pragma once

#include <Eigen/Core>
#include <optional>
#include <utility>
#include <vector>

#include "bvpsens/boundary.hpp"
#include "bvpsens/functional.hpp"
#include "bvpsens/ivp.hpp"
#include "bvpsens/problem.hpp"

namespace bvpsens {

struct SolverOptions {
  Tolerances ivp_tol{};
  QuadratureRule quad{};
  int max_iterations = 50;
  int max_step_halvings = 20;
  /// Converged when ||R||_inf <= residual_tol_factor * (1 + data scale).
  double residual_tol_factor = 1e-10;
  /// Shooting unknowns s0; zero when absent.
  std::optional<Eigen::VectorXd> initial_guess;
  /// Extra span the final dense output must cover beyond [x_1, d].
  std::optional<std::pair<double, double>> cover;
};

/// A converged shooting solve: the dense solution, the fundamental system
/// of the variational equation along it (based at x_1), and the Newton
/// diagnostics.
struct Solution {
  ValidatedProblem problem;
  Trajectory trajectory;          // state components, spans at least [x_1, d]
  FundamentalSystem fundamental;  // x_base = x_1
  double residual_norm = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;  // ||R||_inf per iterate, s0 first
};

/// Initial state at x_1: the m_1 fixed data values followed by the shooting
/// unknowns s (u^(i)(x_1) for m_1 <= i <= n-1).
Eigen::VectorXd assemble_initial_state(const Eigen::VectorXd& fixed,
                                       const Eigen::VectorXd& s);
Eigen::VectorXd assemble_initial_state(const ValidatedProblem& vp,
                                       const Eigen::VectorXd& s);

/// Boundary residual of the flow from x_1 with unknowns s: entries
/// u^(i)(x_j) - y_ij for j = 2..k-1 and u^(i)(x_k) + p int u - y_ik for
/// j = k, in functional order. Length n - m_1.
Eigen::VectorXd shooting_residual(const ValidatedProblem& vp,
                                  const Eigen::VectorXd& s,
                                  const SolverOptions& opts = {});

/// Jacobian of the residual with respect to s, built from the fundamental
/// columns: entry (q, j) = L_q(alpha_{m_1+j}).
Eigen::MatrixXd shooting_jacobian(const ValidatedProblem& vp,
                                  const Eigen::VectorXd& s,
                                  const SolverOptions& opts = {});

/// Damped Newton iteration on the shooting residual. Throws MaxIterations,
/// SingularJacobian, ExtensionFailure, or DisconjugacyViolation when the
/// Jacobian breakdown traces back to a singular boundary-functional matrix.
Solution newton_solve(const ValidatedProblem& vp, const SolverOptions& opts = {});

}  // namespace bvpsens
