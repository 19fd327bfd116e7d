#include "bvpsens/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bvpsens/errors.hpp"

namespace bvpsens {

namespace {

double auto_h0(const ValidatedProblem& vp, const DatumId& id, double h0) {
  if (h0 > 0.0) return h0;
  return 1e-3 * std::max(1.0, std::abs(vp.datum_value(id)));
}

SolverOptions solver_options(const OracleOptions& opts, double cover_lo,
                             double cover_hi) {
  SolverOptions s;
  s.ivp_tol = opts.ivp_tol;
  s.quad = opts.quad;
  s.max_iterations = opts.max_iterations;
  s.cover = {{cover_lo, cover_hi}};
  return s;
}

Eigen::VectorXd base_unknowns(const Solution& sol) {
  const int m1 = sol.problem.multiplicity(1);
  Eigen::VectorXd u0 = sol.trajectory.eval(sol.problem.point(1));
  return u0.tail(sol.problem.order() - m1);
}

ValidatedProblem perturbed(const ValidatedProblem& vp, const DatumId& id,
                           double delta) {
  try {
    return validate(vp.with_datum(id, delta));
  } catch (const ValidationError& e) {
    throw PerturbationInfeasible("perturbing " + id.label() + " by " +
                                 std::to_string(delta) +
                                 " breaks the problem constraints: " +
                                 e.what());
  }
}

// Central difference of the solution values over the grid at one step h.
Eigen::VectorXd central_difference(const ValidatedProblem& vp,
                                   const DatumId& id, double h,
                                   const std::vector<double>& grid,
                                   const Eigen::VectorXd& guess,
                                   const OracleOptions& opts) {
  SolverOptions sopts = solver_options(opts, grid.front(), grid.back());
  sopts.initial_guess = guess;
  Solution plus = newton_solve(perturbed(vp, id, h), sopts);
  Solution minus = newton_solve(perturbed(vp, id, -h), sopts);
  Eigen::VectorXd out(static_cast<int>(grid.size()));
  for (std::size_t g = 0; g < grid.size(); ++g)
    out[static_cast<int>(g)] = (plus.trajectory.eval(grid[g])[0] -
                                minus.trajectory.eval(grid[g])[0]) /
                               (2.0 * h);
  return out;
}

Eigen::VectorXd fd_sensitivity_from_base(const ValidatedProblem& vp,
                                         const Solution& base,
                                         const DatumId& id,
                                         const std::vector<double>& grid,
                                         double h0,
                                         const OracleOptions& opts) {
  const double h = auto_h0(vp, id, h0);
  Eigen::VectorXd guess = base_unknowns(base);
  Eigen::VectorXd d1 = central_difference(vp, id, h, grid, guess, opts);
  Eigen::VectorXd d2 = central_difference(vp, id, h / 2.0, grid, guess, opts);
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

Eigen::VectorXd fd_sensitivity(const ValidatedProblem& vp, const DatumId& id,
                               const std::vector<double>& grid, double h0,
                               const OracleOptions& opts) {
  SolverOptions sopts = solver_options(opts, grid.front(), grid.back());
  Solution base = newton_solve(vp, sopts);
  return fd_sensitivity_from_base(vp, base, id, grid, h0, opts);
}

VerificationReport verify(const ValidatedProblem& vp,
                          const OracleOptions& opts) {
  VerificationReport report;
  report.tol_rel = opts.tol_rel;
  report.bc_tol = opts.bc_tol;

  std::vector<double> grid =
      uniform_grid(vp.point(1), vp.d(), opts.grid_points);
  SolverOptions sopts = solver_options(opts, grid.front(), grid.back());
  Solution sol = newton_solve(vp, sopts);

  SensitivityOptions sens_opts;
  sens_opts.quad = opts.quad;
  sens_opts.printed_cd_signs = opts.printed_cd_signs;
  SensitivityTable table = all_sensitivities(sol, sens_opts);

  report.pass = true;
  for (const DatumId& id : vp.datum_ids()) {
    DatumCheck row{id};
    Eigen::VectorXd fd =
        fd_sensitivity_from_base(vp, sol, id, grid, opts.h0, opts);
    SensFunction z = table.function(id);
    double sup_z = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double zv = z.value(grid[g]);
      sup_z = std::max(sup_z, std::abs(zv));
      row.sup_abs = std::max(row.sup_abs, std::abs(zv - fd[static_cast<int>(g)]));
    }
    row.sup_rel = row.sup_abs / std::max(1.0, sup_z);
    row.bc_residual = (apply_all_functionals(sol, z, opts.quad) -
                       table.target(id))
                          .lpNorm<Eigen::Infinity>();
    row.pass = row.sup_rel <= opts.tol_rel && row.bc_residual <= opts.bc_tol;
    report.pass = report.pass && row.pass;
    report.rows.push_back(std::move(row));
  }
  return report;
}

double peano_check(int n, const Expr& f, double x0, const Eigen::VectorXd& c0,
                   double span_lo, double span_hi, const OracleOptions& opts) {
  auto [state, fs] =
      integrate_fundamental(n, f, x0, c0, span_lo, span_hi, opts.ivp_tol);
  (void)state;

  // u^(i+1)(x0): c0 shifted by one order, closed with f at the top order.
  Eigen::VectorXd up(n);
  for (int i = 0; i + 1 < n; ++i) up[i] = c0[i + 1];
  up[n - 1] = eval_real(f, x0, c0.data(), n);

  const double h = (opts.h0 > 0.0) ? opts.h0 : 1e-3;
  OdeRhs rhs = companion_rhs(n, f);
  auto difference = [&](double step) {
    Trajectory plus =
        integrate_two_sided(rhs, x0 + step, c0, span_lo, span_hi, opts.ivp_tol);
    Trajectory minus =
        integrate_two_sided(rhs, x0 - step, c0, span_lo, span_hi, opts.ivp_tol);
    return std::pair{std::move(plus), std::move(minus)};
  };
  auto [p1, m1] = difference(h);
  auto [p2, m2] = difference(h / 2.0);

  std::vector<double> grid = uniform_grid(span_lo, span_hi, opts.grid_points);
  double sup = 0.0;
  for (double x : grid) {
    double d1 = (p1.eval(x)[0] - m1.eval(x)[0]) / (2.0 * h);
    double d2 = (p2.eval(x)[0] - m2.eval(x)[0]) / h;
    double fd = (4.0 * d2 - d1) / 3.0;
    double identity = 0.0;
    for (int i = 0; i < n; ++i) identity -= up[i] * fs.alpha(i, x)[0];
    sup = std::max(sup, std::abs(fd - identity));
  }
  return sup;
}

ContinuityReport sweep(const ValidatedProblem& vp,
                       const std::vector<double>& deltas,
                       const OracleOptions& opts) {
  if (deltas.empty())
    throw std::invalid_argument("delta list must not be empty");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i] < 0.0)
      throw std::invalid_argument("deltas must be nonnegative");
    if (i > 0 && !(deltas[i] < deltas[i - 1]))
      throw std::invalid_argument("deltas must be strictly decreasing");
  }

  std::vector<double> grid =
      uniform_grid(vp.point(1), vp.d(), opts.grid_points);
  SolverOptions sopts = solver_options(opts, grid.front(), grid.back());
  Solution base = newton_solve(vp, sopts);
  Eigen::VectorXd guess = base_unknowns(base);

  std::vector<Eigen::VectorXd> base_states;
  base_states.reserve(grid.size());
  for (double x : grid) base_states.push_back(base.trajectory.eval(x));

  const double nan = std::numeric_limits<double>::quiet_NaN();
  ContinuityReport report;
  for (const DatumId& id : vp.datum_ids()) {
    double prev_dev = nan;
    for (double delta : deltas) {
      SweepCell cell{id, delta, nan, nan, false, {}};
      try {
        SolverOptions cell_opts = sopts;
        cell_opts.initial_guess = guess;
        Solution sol = newton_solve(perturbed(vp, id, delta), cell_opts);
        double dev = 0.0;
        for (std::size_t g = 0; g < grid.size(); ++g) {
          Eigen::VectorXd u = sol.trajectory.eval(grid[g]);
          dev = std::max(dev,
                         (u - base_states[g]).lpNorm<Eigen::Infinity>());
        }
        cell.sup_deviation = dev;
        cell.ratio_to_prev = prev_dev / dev;
        cell.ok = true;
        prev_dev = dev;
      } catch (const Error& e) {
        cell.note = e.what();
        prev_dev = nan;
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

}  // namespace bvpsens
