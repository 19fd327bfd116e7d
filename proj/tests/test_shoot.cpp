#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bvpsens/boundary.hpp"
#include "bvpsens/errors.hpp"
#include "bvpsens/shoot.hpp"

using namespace bvpsens;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ValidatedProblem t1() { return validate(builtin_problem("t1_linear")); }
ValidatedProblem t2() { return validate(builtin_problem("t2_pendulum")); }

ValidatedProblem t1_with_p(double p) {
  ProblemSpec s = builtin_problem("t1_linear");
  s.p = p;
  return validate(s);
}

}  // namespace

TEST_CASE("assemble_initial_state fixes the x_1 data") {
  CHECK(assemble_initial_state(t1(), vec({7.0})) == vec({0.0, 7.0}));
  CHECK(assemble_initial_state(t2(), vec({0.3})) == vec({0.0, 0.3}));
  // degenerate shooting: all data fixed, no unknowns left
  CHECK(assemble_initial_state(vec({1.0, 2.0}), Eigen::VectorXd()) ==
        vec({1.0, 2.0}));
  CHECK_THROWS_AS(assemble_initial_state(t1(), vec({1.0, 2.0})),
                  std::invalid_argument);
}

TEST_CASE("shooting residual on the linear fixture") {
  ValidatedProblem vp = t1();
  // slope 1: u(x) = x satisfies u(1) + int = 1 + 2 = 3
  CHECK(std::abs(shooting_residual(vp, vec({1.0}))[0]) <= 1e-10);
  // slope 0: u = 0 gives 0 - 3
  CHECK(std::abs(shooting_residual(vp, vec({0.0}))[0] + 3.0) <= 1e-10);
  // slope 2: u = 2x gives 2 + 4 - 3
  CHECK(std::abs(shooting_residual(vp, vec({2.0}))[0] - 3.0) <= 1e-10);
}

TEST_CASE("shooting Jacobian on the linear fixture") {
  ValidatedProblem vp = t1();
  Eigen::MatrixXd jac = shooting_jacobian(vp, vec({0.0}));
  REQUIRE(jac.rows() == 1);
  CHECK(std::abs(jac(0, 0) - 3.0) <= 1e-9);
  // the Jacobian of an affine residual does not depend on s
  Eigen::MatrixXd jac2 = shooting_jacobian(vp, vec({5.0}));
  CHECK(std::abs(jac2(0, 0) - 3.0) <= 1e-9);
}

TEST_CASE("pure two-point case reduces to x_2 - x_1") {
  ValidatedProblem vp = t1_with_p(0.0);
  Eigen::MatrixXd jac = shooting_jacobian(vp, vec({0.0}));
  CHECK(std::abs(jac(0, 0) - 1.0) <= 1e-12);  // x_2 - x_1 = 1
}

TEST_CASE("Jacobian agrees with finite differences of the residual") {
  for (const ValidatedProblem& vp : {t1(), t2()}) {
    Eigen::VectorXd s = vec({0.2});
    Eigen::MatrixXd jac = shooting_jacobian(vp, s);
    const double h = 1e-6;
    Eigen::VectorXd rp = shooting_residual(vp, vec({0.2 + h}));
    Eigen::VectorXd rm = shooting_residual(vp, vec({0.2 - h}));
    double fd = (rp[0] - rm[0]) / (2.0 * h);
    CHECK(std::abs(jac(0, 0) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("linear problems converge in exactly one Newton step") {
  Solution sol = newton_solve(t1());
  CHECK(sol.iterations == 1);
  CHECK(sol.residual_norm <= 1e-10 * (1.0 + 3.0));
  CHECK(std::abs(sol.trajectory.eval(0.0)[1] - 1.0) <= 1e-10);  // s = 1
  // solution is u(x) = x over the whole span
  for (double x : uniform_grid(0.0, 2.5, 26))
    CHECK(std::abs(sol.trajectory.eval(x)[0] - x) <= 1e-10);
}

TEST_CASE("pendulum fixture converges quickly from zero") {
  Solution sol = newton_solve(t2());
  CHECK(sol.iterations <= 10);
  CHECK(sol.residual_norm <= 1e-10 * (1.0 + 0.5));
  CHECK(sol.trajectory.lo() <= 0.0);
  CHECK(sol.trajectory.hi() >= 2.5);
}

TEST_CASE("back-substitution reproduces the boundary data") {
  for (const ValidatedProblem& vp : {t1(), t2()}) {
    Solution sol = newton_solve(vp);
    // independent re-integration from the converged initial state
    Eigen::VectorXd u0 = sol.trajectory.eval(vp.point(1));
    Trajectory redo = integrate(companion_rhs(vp.order(), vp.rhs()),
                                vp.point(1), u0, vp.d(), {1e-12, 1e-12});
    std::vector<BoundaryFunctional> ls = functionals(vp);
    for (int q = 0; q < vp.order(); ++q) {
      double got = apply_functional(ls[static_cast<std::size_t>(q)], redo, 0,
                                    vp, QuadratureRule{});
      CHECK(std::abs(got - vp.flat_data()[q]) <= 1e-9);
    }
  }
}

TEST_CASE("Newton tail on the pendulum is quadratic") {
  Solution sol = newton_solve(t2());
  const auto& r = sol.residual_history;
  REQUIRE(r.size() >= 3);
  std::size_t first = r.size() >= 4 ? r.size() - 4 : 0;
  for (std::size_t k = first; k + 1 < r.size(); ++k) {
    CHECK(r[k + 1] <= 1e3 * r[k] * r[k]);
  }
}

TEST_CASE("solution is stable under tolerance halving") {
  SolverOptions base;
  SolverOptions half;
  half.ivp_tol = {5e-11, 5e-11};
  Solution s1 = newton_solve(t2(), base);
  Solution s2 = newton_solve(t2(), half);
  double diff = 0.0;
  for (double x : uniform_grid(0.0, 2.5, 101))
    diff = std::max(diff,
                    std::abs(s1.trajectory.eval(x)[0] - s2.trajectory.eval(x)[0]));
  CHECK(diff <= 1e-7);
}

TEST_CASE("iteration budget is enforced") {
  SolverOptions opts;
  opts.max_iterations = 1;
  CHECK_THROWS_AS(newton_solve(t2(), opts), MaxIterations);
}

TEST_CASE("singular boundary matrix surfaces as DisconjugacyViolation") {
  // p = -0.5 zeroes the second column of M: 1 + p*(d^2-c^2)/2 = 0
  CHECK_THROWS_AS(newton_solve(t1_with_p(-0.5)), DisconjugacyViolation);
}

TEST_CASE("extension failures propagate") {
  ProblemSpec s = builtin_problem("t1_linear");
  s.rhs = parse_expr("1 + y0^2 + y1^2");
  s.data = {{0.0}, {100.0}};
  // the full Newton step shoots into blow-up territory
  CHECK_THROWS_AS(newton_solve(validate(s)), ExtensionFailure);
}

TEST_CASE("initial guess option is honored") {
  SolverOptions opts;
  opts.initial_guess = vec({0.9});
  Solution sol = newton_solve(t1(), opts);
  CHECK(sol.iterations >= 1);
  CHECK(std::abs(sol.trajectory.eval(0.0)[1] - 1.0) <= 1e-10);
}

TEST_CASE("cover option extends the dense span") {
  SolverOptions opts;
  opts.cover = {{-0.5, 3.0}};
  Solution sol = newton_solve(t1(), opts);
  CHECK(sol.trajectory.lo() <= -0.5);
  CHECK(sol.trajectory.hi() >= 3.0);
  CHECK(std::abs(sol.trajectory.eval(-0.5)[0] + 0.5) <= 1e-10);  // u(x) = x
}
