#include "bvpsens/shoot.hpp"

#include <Eigen/LU>
#include <cmath>
#include <sstream>

#include "bvpsens/errors.hpp"

namespace bvpsens {

namespace {

struct Shot {
  FundamentalSystem fs;
  Eigen::MatrixXd full_matrix;  // n x n functional matrix along this iterate
  Eigen::VectorXd residual;     // length n - m_1
};

std::pair<double, double> solve_span(const ValidatedProblem& vp,
                                     const SolverOptions& opts) {
  double lo = vp.point(1);
  double hi = vp.d();
  if (opts.cover) {
    lo = std::min(lo, opts.cover->first);
    hi = std::max(hi, opts.cover->second);
  }
  return {lo, hi};
}

Shot integrate_shot(const ValidatedProblem& vp, const Eigen::VectorXd& s,
                    const SolverOptions& opts) {
  const int n = vp.order();
  const int m1 = vp.multiplicity(1);
  Eigen::VectorXd u0 = assemble_initial_state(vp, s);
  auto span = solve_span(vp, opts);
  auto [state, fs] = integrate_fundamental(vp, vp.point(1), u0, span.first,
                                           span.second, opts.ivp_tol);
  (void)state;

  Eigen::MatrixXd full = functional_matrix(vp, fs, opts.quad);
  std::vector<BoundaryFunctional> ls = functionals(vp);
  Eigen::VectorXd r(n - m1);
  for (int q = m1; q < n; ++q)
    r[q - m1] = apply_functional(ls[static_cast<std::size_t>(q)],
                                 fs.augmented(), 0, vp, opts.quad) -
                vp.flat_data()[q];
  return {std::move(fs), std::move(full), std::move(r)};
}

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0;
}

}  // namespace

Eigen::VectorXd assemble_initial_state(const Eigen::VectorXd& fixed,
                                       const Eigen::VectorXd& s) {
  Eigen::VectorXd u0(fixed.size() + s.size());
  u0.head(fixed.size()) = fixed;
  u0.tail(s.size()) = s;
  return u0;
}

Eigen::VectorXd assemble_initial_state(const ValidatedProblem& vp,
                                       const Eigen::VectorXd& s) {
  const int m1 = vp.multiplicity(1);
  if (s.size() != vp.order() - m1)
    throw std::invalid_argument("shooting unknowns must have length n - m_1");
  return assemble_initial_state(vp.flat_data().head(m1), s);
}

Eigen::VectorXd shooting_residual(const ValidatedProblem& vp,
                                  const Eigen::VectorXd& s,
                                  const SolverOptions& opts) {
  return integrate_shot(vp, s, opts).residual;
}

Eigen::MatrixXd shooting_jacobian(const ValidatedProblem& vp,
                                  const Eigen::VectorXd& s,
                                  const SolverOptions& opts) {
  const int m1 = vp.multiplicity(1);
  const int nfree = vp.order() - m1;
  return integrate_shot(vp, s, opts).full_matrix.bottomRightCorner(nfree, nfree);
}

Solution newton_solve(const ValidatedProblem& vp, const SolverOptions& opts) {
  const int n = vp.order();
  const int m1 = vp.multiplicity(1);
  const int nfree = n - m1;

  Eigen::VectorXd s = Eigen::VectorXd::Zero(nfree);
  if (opts.initial_guess) {
    if (opts.initial_guess->size() != nfree)
      throw std::invalid_argument("initial guess must have length n - m_1");
    s = *opts.initial_guess;
  }

  const double tol = opts.residual_tol_factor * (1.0 + vp.data_scale());

  Shot shot = integrate_shot(vp, s, opts);
  double rnorm = inf_norm(shot.residual);
  std::vector<double> history{rnorm};
  int iterations = 0;

  while (rnorm > tol) {
    if (iterations >= opts.max_iterations) {
      std::ostringstream os;
      os << "Newton iteration did not converge within " << opts.max_iterations
         << " iterations (residual " << rnorm << ", tolerance " << tol << ")";
      throw MaxIterations(os.str());
    }

    Eigen::MatrixXd jac =
        shot.full_matrix.bottomRightCorner(nfree, nfree);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    double scale = std::max(1.0, jac.cwiseAbs().maxCoeff());
    if (min_pivot < 1e-12 * scale) {
      // Pivot breakdown: decide whether it is structural by running the
      // uniqueness surrogate on the full functional matrix along this
      // iterate's trajectory.
      check_disconjugacy(shot.full_matrix);
      std::ostringstream os;
      os << "shooting Jacobian pivot " << min_pivot
         << " below threshold; likely violation of the uniqueness hypotheses";
      throw SingularJacobian(os.str());
    }

    Eigen::VectorXd delta = lu.solve(-shot.residual);
    double lambda = 1.0;
    Eigen::VectorXd s_try;
    Shot shot_try = shot;  // placeholder; overwritten below
    double r_try = rnorm;
    for (int halving = 0;; ++halving) {
      s_try = s + lambda * delta;
      shot_try = integrate_shot(vp, s_try, opts);
      r_try = inf_norm(shot_try.residual);
      if (r_try < rnorm || halving >= opts.max_step_halvings) break;
      lambda *= 0.5;
    }
    s = std::move(s_try);
    shot = std::move(shot_try);
    rnorm = r_try;
    ++iterations;
    history.push_back(rnorm);
  }

  return Solution{vp,
                  shot.fs.state_trajectory(),
                  std::move(shot.fs),
                  rnorm,
                  iterations,
                  std::move(history)};
}

}  // namespace bvpsens
