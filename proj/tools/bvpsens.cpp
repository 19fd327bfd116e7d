#include <CLI11.hpp>
#include <cstdio>
#include <functional>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "bvpsens/config.hpp"
#include "bvpsens/errors.hpp"
#include "bvpsens/oracle.hpp"
#include "bvpsens/sens.hpp"
#include "bvpsens/shoot.hpp"

namespace {

using namespace bvpsens;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> parse_number_list(const std::string& text,
                                      const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string item = text.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (item.empty())
      throw ConfigError(std::string("empty entry in ") + what + " list");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError(std::string("bad number '") + item + "' in " + what +
                        " list");
    }
    if (used != item.size())
      throw ConfigError(std::string("bad number '") + item + "' in " + what +
                        " list");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

struct CommonFlags {
  std::string config_path;
  double tol = 1e-10;
  int quad_nodes = 5;
  int grid = 201;
  int max_iter = 50;
  std::string guess;
};

void add_common(CLI::App* sub, CommonFlags& c) {
  sub->add_option("config", c.config_path, "problem config JSON file")
      ->required();
  sub->add_option("--tol", c.tol,
                  "integrator absolute and relative tolerance (default 1e-10)");
  sub->add_option("--quad-nodes", c.quad_nodes,
                  "Gauss-Legendre nodes per quadrature panel (default 5)");
  sub->add_option("--grid", c.grid,
                  "number of output grid points over [x_1, d] (default 201)");
  sub->add_option("--max-iter", c.max_iter,
                  "Newton iteration budget (default 50)");
  sub->add_option("--guess", c.guess,
                  "comma-separated initial shooting unknowns s0");
}

SolverOptions make_solver_options(const CommonFlags& c) {
  SolverOptions opts;
  opts.ivp_tol = {c.tol, c.tol};
  opts.quad.nodes_per_segment = c.quad_nodes;
  opts.max_iterations = c.max_iter;
  if (!c.guess.empty()) {
    std::vector<double> g = parse_number_list(c.guess, "--guess");
    opts.initial_guess =
        Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<int>(g.size()));
  }
  return opts;
}

ValidatedProblem load(const CommonFlags& c) {
  return validate(load_problem_file(c.config_path));
}

int cmd_solve(const CommonFlags& c) {
  ValidatedProblem vp = load(c);
  Solution sol = newton_solve(vp, make_solver_options(c));
  std::string header = "x";
  for (int i = 0; i < vp.order(); ++i) header += ",u" + std::to_string(i);
  std::cout << header << "\n";
  for (double x : uniform_grid(vp.point(1), vp.d(), c.grid)) {
    Eigen::VectorXd u = sol.trajectory.eval(x);
    std::string row = fmt(x);
    for (int i = 0; i < vp.order(); ++i) row += "," + fmt(u[i]);
    std::cout << row << "\n";
  }
  return 0;
}

int cmd_sens(const CommonFlags& c, const std::string& datum,
             bool paper_signs) {
  ValidatedProblem vp = load(c);
  Solution sol = newton_solve(vp, make_solver_options(c));
  SensitivityOptions sopts;
  sopts.quad.nodes_per_segment = c.quad_nodes;
  sopts.printed_cd_signs = paper_signs;
  SensitivityTable table = all_sensitivities(sol, sopts);

  std::vector<DatumId> columns;
  if (datum == "all") {
    columns = vp.datum_ids();
  } else {
    DatumId id = DatumId::parse(datum);
    bool known = false;
    for (const DatumId& candidate : vp.datum_ids())
      known = known || candidate == id;
    if (!known)
      throw ConfigError("datum " + id.label() +
                        " is not a boundary datum of this problem");
    columns.push_back(id);
  }

  std::vector<SensFunction> fns;
  std::string header = "x";
  for (const DatumId& id : columns) {
    header += "," + id.label();
    fns.push_back(table.function(id));
  }
  std::cout << header << "\n";
  for (double x : uniform_grid(vp.point(1), vp.d(), c.grid)) {
    std::string row = fmt(x);
    for (const SensFunction& z : fns) row += "," + fmt(z.value(x));
    std::cout << row << "\n";
  }
  return 0;
}

int cmd_verify(const CommonFlags& c, double h0, double tol_rel,
               bool paper_signs) {
  ValidatedProblem vp = load(c);
  OracleOptions opts;
  opts.h0 = h0;
  opts.tol_rel = tol_rel;
  opts.ivp_tol = {c.tol, c.tol};
  opts.quad.nodes_per_segment = c.quad_nodes;
  opts.grid_points = c.grid;
  opts.printed_cd_signs = paper_signs;
  opts.max_iterations = c.max_iter;
  VerificationReport report = verify(vp, opts);

  nlohmann::ordered_json j;
  j["tol_rel"] = report.tol_rel;
  j["bc_tol"] = report.bc_tol;
  j["h0"] = h0;
  j["paper_signs"] = paper_signs;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const DatumCheck& row : report.rows) {
    nlohmann::ordered_json r;
    r["datum"] = row.id.label();
    r["sup_abs"] = row.sup_abs;
    r["sup_rel"] = row.sup_rel;
    r["bc_residual"] = row.bc_residual;
    r["pass"] = row.pass;
    rows.push_back(std::move(r));
  }
  j["results"] = std::move(rows);
  j["pass"] = report.pass;
  std::cout << j.dump(2) << "\n";
  return report.pass ? 0 : 4;
}

int cmd_sweep(const CommonFlags& c, const std::string& deltas_text) {
  ValidatedProblem vp = load(c);
  std::vector<double> deltas = parse_number_list(deltas_text, "--deltas");
  OracleOptions opts;
  opts.ivp_tol = {c.tol, c.tol};
  opts.quad.nodes_per_segment = c.quad_nodes;
  opts.max_iterations = c.max_iter;
  ContinuityReport report = sweep(vp, deltas, opts);

  std::cout << "datum,delta,sup_deviation,ratio_to_prev\n";
  for (const SweepCell& cell : report.cells) {
    if (!cell.ok)
      std::cerr << "warning: " << cell.id.label() << " delta=" << fmt(cell.delta)
                << ": " << cell.note << "\n";
    std::cout << cell.id.label() << "," << fmt(cell.delta) << ","
              << fmt(cell.sup_deviation) << "," << fmt(cell.ratio_to_prev)
              << "\n";
  }
  return 0;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const DisconjugacyViolation& e) {
    std::cerr << "error: DisconjugacyViolation: " << e.what() << "\n";
    return 3;
  } catch (const MaxIterations& e) {
    std::cerr << "error: MaxIterations: " << e.what() << "\n";
    return 2;
  } catch (const SingularJacobian& e) {
    std::cerr << "error: SingularJacobian: " << e.what() << "\n";
    return 2;
  } catch (const ExtensionFailure& e) {
    std::cerr << "error: ExtensionFailure: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Shooting solver and boundary-data sensitivities for nth-order "
      "multipoint boundary value problems with an integral boundary "
      "condition"};
  app.require_subcommand(1);

  CommonFlags solve_flags, sens_flags, verify_flags, sweep_flags;
  std::string datum = "all";
  bool sens_paper_signs = false, verify_paper_signs = false;
  double h0 = 0.0, tol_rel = 1e-5;
  std::string deltas = "1e-2,1e-3,1e-4";

  CLI::App* solve = app.add_subcommand(
      "solve", "solve the problem and print u, u', ... on a uniform grid");
  add_common(solve, solve_flags);

  CLI::App* sens = app.add_subcommand(
      "sens", "print sensitivities of u with respect to the boundary data");
  add_common(sens, sens_flags);
  sens->add_option("--datum", datum,
                   "all | y:<r>:<l> | x:<l> | c | d | p (default all)");
  sens->add_flag("--paper-signs", sens_paper_signs,
                 "use the alternative published sign convention for the c/d "
                 "targets");

  CLI::App* verify_cmd = app.add_subcommand(
      "verify",
      "compare every sensitivity against a finite-difference oracle");
  add_common(verify_cmd, verify_flags);
  verify_cmd->add_option("--h0", h0,
                         "finite-difference step (default 1e-3 per datum "
                         "scale)");
  verify_cmd->add_option("--tol-rel", tol_rel,
                         "relative sup-norm pass tolerance (default 1e-5)");
  verify_cmd->add_flag("--paper-signs", verify_paper_signs,
                       "use the alternative published sign convention for "
                       "the c/d targets");

  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "perturb each datum and report uniform deviations");
  add_common(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--deltas", deltas,
                        "comma-separated decreasing perturbation sizes "
                        "(default 1e-2,1e-3,1e-4)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (solve->parsed()) return guarded([&] { return cmd_solve(solve_flags); });
  if (sens->parsed())
    return guarded([&] { return cmd_sens(sens_flags, datum, sens_paper_signs); });
  if (verify_cmd->parsed())
    return guarded(
        [&] { return cmd_verify(verify_flags, h0, tol_rel, verify_paper_signs); });
  if (sweep_cmd->parsed())
    return guarded([&] { return cmd_sweep(sweep_flags, deltas); });
  return 1;
}
