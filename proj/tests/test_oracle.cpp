#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bvpsens/errors.hpp"
#include "bvpsens/oracle.hpp"

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

}  // namespace

TEST_CASE("finite-difference sensitivities on the linear fixture") {
  ValidatedProblem vp = t1();
  std::vector<double> grid = uniform_grid(0.0, 2.5, 101);

  Eigen::VectorXd fd = fd_sensitivity(vp, DatumId::y(0, 2), grid, 0.0);
  CHECK(std::abs(fd[40] - 1.0 / 3.0) <= 1e-8);  // grid[40] = 1.0

  fd = fd_sensitivity(vp, DatumId::p(), grid, 0.0);
  CHECK(std::abs(fd[60] - (-1.0)) <= 1e-7);  // -2x/3 at x = 1.5

  // adjudicates the c-target sign: +x/2, not -x/2
  fd = fd_sensitivity(vp, DatumId::c(), grid, 0.0);
  CHECK(std::abs(fd[40] - 0.5) <= 1e-7);
}

TEST_CASE("Richardson extrapolation is insensitive to halving h0") {
  std::vector<double> grid = uniform_grid(0.0, 2.5, 51);
  struct Probe {
    ValidatedProblem vp;
    DatumId id;
  };
  const Probe probes[] = {{t1(), DatumId::y(0, 2)},
                          {t2(), DatumId::x(1)},
                          {t2(), DatumId::p()}};
  for (const Probe& probe : probes) {
    Eigen::VectorXd a = fd_sensitivity(probe.vp, probe.id, grid, 1e-3);
    Eigen::VectorXd b = fd_sensitivity(probe.vp, probe.id, grid, 5e-4);
    double scale = std::max(1.0, a.lpNorm<Eigen::Infinity>());
    CHECK((a - b).lpNorm<Eigen::Infinity>() <= 1e-6 * scale);
  }
}

TEST_CASE("infeasible perturbations are refused") {
  ValidatedProblem vp = t1();
  std::vector<double> grid = uniform_grid(0.0, 2.5, 11);
  // c - 0.6 < x_k breaks the ordering
  CHECK_THROWS_AS(fd_sensitivity(vp, DatumId::c(), grid, 0.6),
                  PerturbationInfeasible);
  CHECK_THROWS_AS(fd_sensitivity(vp, DatumId::x(2), grid, 1.5),
                  PerturbationInfeasible);
}

TEST_CASE("verify passes the linear fixture tightly") {
  VerificationReport report = verify(t1());
  CHECK(report.pass);
  REQUIRE(report.rows.size() == 7);
  for (const DatumCheck& row : report.rows) {
    CAPTURE(row.id.label());
    CHECK(row.pass);
    CHECK(row.sup_rel <= 1e-6);
    CHECK(row.bc_residual <= 1e-8);
  }
}

TEST_CASE("verify passes the pendulum at 1e-5") {
  VerificationReport report = verify(t2());
  CHECK(report.pass);
  for (const DatumCheck& row : report.rows) {
    CAPTURE(row.id.label());
    CHECK(row.sup_rel <= 1e-5);
  }
}

TEST_CASE("printed c/d signs fail against the oracle, the rest pass") {
  OracleOptions opts;
  opts.printed_cd_signs = true;
  VerificationReport report = verify(t1(), opts);
  CHECK_FALSE(report.pass);
  for (const DatumCheck& row : report.rows) {
    CAPTURE(row.id.label());
    bool is_cd = row.id == DatumId::c() || row.id == DatumId::d();
    if (is_cd) {
      CHECK_FALSE(row.pass);
      CHECK(row.sup_abs >= 0.1);
      // the targets themselves are still met; only the oracle disagrees
      CHECK(row.bc_residual <= 1e-8);
    } else {
      CHECK(row.pass);
    }
  }
}

TEST_CASE("Peano identity for the drift-free second-order problem") {
  OracleOptions opts;
  opts.ivp_tol = {1e-12, 1e-12};
  // u(x) = 2 + 5(x - x0): du/dx0 = -5 everywhere
  double residual =
      peano_check(2, parse_expr("0"), 0.0, vec({2.0, 5.0}), -1.0, 1.0, opts);
  CHECK(residual <= 1e-8);
}

TEST_CASE("Peano identity for exponential growth") {
  OracleOptions opts;
  opts.ivp_tol = {1e-12, 1e-12};
  // both sides equal -3 e^{x-x0}
  double residual =
      peano_check(1, parse_expr("y0"), 0.0, vec({3.0}), -1.0, 1.0, opts);
  CHECK(residual <= 1e-7);
}

TEST_CASE("Peano identity vanishes on the zero solution") {
  double residual =
      peano_check(1, parse_expr("y0"), 0.0, vec({0.0}), -1.0, 1.0);
  CHECK(residual <= 1e-15);
}

TEST_CASE("sweep on the linear fixture is first-order exact in the data") {
  ValidatedProblem vp = t1();
  ContinuityReport report = sweep(vp, {1e-2, 1e-3, 1e-4});
  // deviation for y:0:2 equals delta * sup over orders of |Y02^(i)|
  //   = delta * max(2.5/3, 1/3)
  const double slope = 2.5 / 3.0;
  for (const SweepCell& cell : report.cells) {
    if (!(cell.id == DatumId::y(0, 2))) continue;
    CHECK(cell.ok);
    CHECK(std::abs(cell.sup_deviation - slope * cell.delta) <=
          0.05 * slope * cell.delta);
  }
  // exact linearity for the data values the problem is linear in
  for (const DatumId& id : {DatumId::y(0, 1), DatumId::y(0, 2)}) {
    double slope_ref = 0.0;
    for (const SweepCell& cell : report.cells) {
      if (!(cell.id == id)) continue;
      if (slope_ref == 0.0) slope_ref = cell.sup_deviation / cell.delta;
      CHECK(std::abs(cell.sup_deviation - slope_ref * cell.delta) <= 1e-9);
    }
  }
}

TEST_CASE("sweep with delta zero reports zero deviation") {
  ContinuityReport report = sweep(t1(), {1e-3, 0.0});
  for (const SweepCell& cell : report.cells)
    if (cell.delta == 0.0) {
      CHECK(cell.ok);
      CHECK(cell.sup_deviation == 0.0);
    }
}

TEST_CASE("sweep ratios on the pendulum stay near one decade") {
  ContinuityReport report = sweep(t2(), {1e-2, 1e-3, 1e-4, 1e-5});
  int checked = 0;
  for (const SweepCell& cell : report.cells) {
    CHECK(cell.ok);
    if (std::isfinite(cell.ratio_to_prev)) {
      CHECK(cell.ratio_to_prev >= 5.0);
      CHECK(cell.ratio_to_prev <= 20.0);
      ++checked;
    }
  }
  CHECK(checked == 7 * 3);
}

TEST_CASE("higher-order multipoint problems pass verification") {
  // n = 3, k = 3: interior-point residual rows, mildly nonlinear rhs.
  // Data from the exact f = 0 solution u = x^2.
  ProblemSpec s3;
  s3.n = 3;
  s3.a = -1.0;
  s3.b = 4.0;
  s3.points = {0.0, 0.5, 1.0};
  s3.multiplicities = {1, 1, 1};
  s3.data = {{0.0}, {0.25}, {1.925}};
  s3.p = 0.6;
  s3.c = 1.5;
  s3.d = 2.0;
  s3.rhs = parse_expr("0.1*sin(y0)");
  ValidatedProblem vp3 = validate(s3);
  VerificationReport r3 = verify(vp3);
  CHECK(r3.pass);
  CHECK(r3.rows.size() == 9);  // n + k + 3

  // n = 4 with two conditions at x_1 (u and u'); exact solution x^3 - x.
  ProblemSpec s4;
  s4.n = 4;
  s4.a = -1.0;
  s4.b = 4.0;
  s4.points = {0.0, 0.6, 1.0};
  s4.multiplicities = {2, 1, 1};
  s4.data = {{0.0, -1.0}, {-0.384}, {0.74375}};
  s4.p = 0.4;
  s4.c = 1.5;
  s4.d = 2.0;
  s4.rhs = parse_expr("0");
  ValidatedProblem vp4 = validate(s4);
  Solution sol4 = newton_solve(vp4);
  for (double x : uniform_grid(0.0, 2.0, 21))
    CHECK(std::abs(sol4.trajectory.eval(x)[0] - (x * x * x - x)) <= 1e-9);
  VerificationReport r4 = verify(vp4);
  CHECK(r4.pass);
  CHECK(r4.rows.size() == 10);

  // combination identities hold there too (X_1 sums two Y terms)
  SensitivityTable table = all_sensitivities(sol4);
  CHECK(combination_check(sol4, table).max_residual <= 1e-8);
}

TEST_CASE("sweep validates its delta list") {
  CHECK_THROWS_AS(sweep(t1(), {}), std::invalid_argument);
  CHECK_THROWS_AS(sweep(t1(), {1e-3, 1e-2}), std::invalid_argument);
  CHECK_THROWS_AS(sweep(t1(), {1e-2, -1e-3}), std::invalid_argument);
}

TEST_CASE("sweep records infeasible cells instead of failing") {
  // delta = 0.75 pushes c past d... c + 0.75 = 2.25 < d, but x2 + 0.75
  // crosses c; use 0.6: feasible for y data, infeasible for x:2 (1.6 > c)
  ContinuityReport report = sweep(t1(), {0.6});
  bool saw_bad = false, saw_good = false;
  for (const SweepCell& cell : report.cells) {
    if (cell.id == DatumId::x(2)) {
      CHECK_FALSE(cell.ok);
      CHECK(std::isnan(cell.sup_deviation));
      saw_bad = true;
    }
    if (cell.id == DatumId::y(0, 2)) {
      CHECK(cell.ok);
      saw_good = true;
    }
  }
  CHECK(saw_bad);
  CHECK(saw_good);
}
