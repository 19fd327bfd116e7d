#pragma once

#include <Eigen/Core>
#include <functional>
#include <utility>
#include <vector>

#include "bvpsens/expr.hpp"
#include "bvpsens/problem.hpp"

namespace bvpsens {

struct Tolerances {
  double atol = 1e-10;
  double rtol = 1e-10;
};

/// Right-hand side of a first-order system u' = rhs(x, u).
using OdeRhs =
    std::function<void(double x, const Eigen::VectorXd& u, Eigen::VectorXd& du)>;

/// Dense-output solution of an initial value problem: the accepted steps of
/// an adaptive Dormand-Prince 5(4) run, each with a quartic interpolant.
/// Immutable after construction; safe for concurrent reads.
class Trajectory {
 public:
  struct Step {
    double x0, x1;           // endpoints in integration order (x1-x0 signed)
    Eigen::VectorXd y0, y1;  // states at x0, x1 (stored exactly)
    Eigen::MatrixXd coef;    // dim x 5 interpolation coefficients
  };

  Trajectory() = default;
  explicit Trajectory(std::vector<Step> steps);

  int dimension() const { return dim_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool contains(double x) const { return x >= lo_ && x <= hi_; }

  /// State at x; exact at stored step endpoints. Throws SpanError outside
  /// [lo, hi].
  Eigen::VectorXd eval(double x) const;
  double eval(double x, int component) const { return eval(x)[component]; }

  /// Derivative of the interpolant with respect to x.
  Eigen::VectorXd eval_derivative(double x) const;
  double eval_derivative(double x, int component) const {
    return eval_derivative(x)[component];
  }

  /// Trajectory of the first m components.
  Trajectory head(int m) const;

  const std::vector<Step>& steps() const { return steps_; }

  /// Two pieces sharing a base point combined into one span.
  static Trajectory merge(const Trajectory& a, const Trajectory& b);

 private:
  const Step& locate(double x) const;
  std::vector<Step> steps_;       // sorted by min(x0, x1)
  std::vector<double> step_lo_;   // search keys
  int dim_ = 0;
  double lo_ = 0.0, hi_ = 0.0;
};

/// Adaptive Dormand-Prince 5(4) with mixed error control and quartic dense
/// output; integrates in either direction. Throws ExtensionFailure when the
/// state norm exceeds 1e12 or the step size underflows below 1e-14 of the
/// span.
Trajectory integrate(const OdeRhs& rhs, double x0, const Eigen::VectorXd& u0,
                     double x_end, const Tolerances& tol = {});

/// Integrate from x0 both ways as needed so the result spans [lo, hi].
Trajectory integrate_two_sided(const OdeRhs& rhs, double x0,
                               const Eigen::VectorXd& u0, double lo, double hi,
                               const Tolerances& tol = {});

/// First-order companion form of y^(n) = f(x, y, ..., y^(n-1)).
OdeRhs companion_rhs(int n, const Expr& f);

/// The n x n matrix solution Phi(x) of the variational equation along a
/// trajectory, with Phi(x_base) = I. Column j is the solution alpha_j with
/// alpha_j^(i)(x_base) = delta_ij. Stored jointly with the state as one
/// trajectory of dimension n + n^2.
class FundamentalSystem {
 public:
  FundamentalSystem(Trajectory augmented, double x_base, int n);

  int order() const { return n_; }
  double x_base() const { return x_base_; }
  const Trajectory& augmented() const { return aug_; }

  /// Component index of alpha_j's value inside the augmented trajectory.
  int column_base(int j) const { return n_ + j * n_; }

  Eigen::MatrixXd phi(double x) const;
  Eigen::VectorXd alpha(int j, double x) const;  // alpha_j^(i)(x), i = 0..n-1
  Eigen::VectorXd state(double x) const;         // u^(i)(x), i = 0..n-1
  Trajectory state_trajectory() const { return aug_.head(n_); }

 private:
  Trajectory aug_;
  double x_base_;
  int n_;
};

/// Joint integration of the state and the fundamental matrix with one
/// step-size control. Covers at least [min(x_base, lo), max(x_base, hi)].
std::pair<Trajectory, FundamentalSystem> integrate_fundamental(
    int n, const Expr& f, double x_base, const Eigen::VectorXd& u0, double lo,
    double hi, const Tolerances& tol = {});

/// As above with the span widened to cover the problem's boundary points and
/// integral limits, [min(x_1, lo), max(d, hi)].
std::pair<Trajectory, FundamentalSystem> integrate_fundamental(
    const ValidatedProblem& vp, double x_base, const Eigen::VectorXd& u0,
    double lo, double hi, const Tolerances& tol = {});

/// u^(0..n)(x) for an order-n scalar equation: orders 0..n-1 from the dense
/// state, order n from f itself.
Eigen::VectorXd derivatives_through_order(int n, const Expr& f,
                                          const Trajectory& state, double x);

/// count equally spaced abscissae from lo to hi inclusive.
std::vector<double> uniform_grid(double lo, double hi, int count);

}  // namespace bvpsens
