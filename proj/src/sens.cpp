#include "bvpsens/sens.hpp"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

#include "bvpsens/errors.hpp"

namespace bvpsens {

double SensFunction::value(double x) const {
  const int n = fs_->order();
  Eigen::VectorXd w = fs_->augmented().eval(x);
  double v = 0.0;
  for (int j = 0; j < n; ++j) v += coeffs_[j] * w[fs_->column_base(j)];
  return v;
}

Eigen::VectorXd SensFunction::derivatives(double x) const {
  return fs_->phi(x) * coeffs_;
}

Eigen::MatrixXd build_M(const Solution& sol, const QuadratureRule& rule) {
  Eigen::MatrixXd m = functional_matrix(sol.problem, sol.fundamental, rule);
  check_disconjugacy(m);
  return m;
}

Eigen::VectorXd target_vector(const Solution& sol, const DatumId& id,
                              const SensitivityOptions& opts) {
  const ValidatedProblem& vp = sol.problem;
  const int n = vp.order();
  const int k = vp.point_count();
  std::vector<BoundaryFunctional> ls = functionals(vp);
  Eigen::VectorXd t = Eigen::VectorXd::Zero(n);

  switch (id.kind()) {
    case DatumId::Kind::Y:
      for (int q = 0; q < n; ++q)
        if (ls[static_cast<std::size_t>(q)].point_index == id.l() &&
            ls[static_cast<std::size_t>(q)].derivative_order == id.r())
          t[q] = 1.0;
      break;
    case DatumId::Kind::X: {
      Eigen::VectorXd derivs = derivatives_through_order(
          n, vp.rhs(), sol.trajectory, vp.point(id.l()));
      for (int q = 0; q < n; ++q)
        if (ls[static_cast<std::size_t>(q)].point_index == id.l())
          t[q] = -derivs[ls[static_cast<std::size_t>(q)].derivative_order + 1];
      break;
    }
    case DatumId::Kind::C: {
      double uc = sol.trajectory.eval(vp.c())[0];
      double value = (opts.printed_cd_signs ? -1.0 : 1.0) * vp.weight() * uc;
      for (int q = 0; q < n; ++q)
        if (ls[static_cast<std::size_t>(q)].point_index == k) t[q] = value;
      break;
    }
    case DatumId::Kind::D: {
      double ud = sol.trajectory.eval(vp.d())[0];
      double value = (opts.printed_cd_signs ? 1.0 : -1.0) * vp.weight() * ud;
      for (int q = 0; q < n; ++q)
        if (ls[static_cast<std::size_t>(q)].point_index == k) t[q] = value;
      break;
    }
    case DatumId::Kind::P: {
      double integral = nonlocal_integral(sol.trajectory, 0, 1.0, vp.c(),
                                          vp.d(), opts.quad);
      for (int q = 0; q < n; ++q)
        if (ls[static_cast<std::size_t>(q)].point_index == k) t[q] = -integral;
      break;
    }
  }
  return t;
}

SensFunction solve_sensitivity(const Solution& sol, const DatumId& id,
                               const SensitivityOptions& opts) {
  Eigen::MatrixXd m = build_M(sol, opts.quad);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  Eigen::VectorXd c = lu.solve(target_vector(sol, id, opts));
  auto fs = std::make_shared<const FundamentalSystem>(sol.fundamental);
  return SensFunction(std::move(fs), std::move(c));
}

int SensitivityTable::index_of(const DatumId& id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (ids_[i] == id) return static_cast<int>(i);
  throw std::invalid_argument("datum " + id.label() +
                              " is not part of this problem");
}

SensFunction SensitivityTable::function(const DatumId& id) const {
  return SensFunction(fs_, coeffs_.col(index_of(id)));
}

Eigen::VectorXd SensitivityTable::coefficients(const DatumId& id) const {
  return coeffs_.col(index_of(id));
}

Eigen::VectorXd SensitivityTable::target(const DatumId& id) const {
  return targets_.col(index_of(id));
}

SensitivityTable all_sensitivities(const Solution& sol,
                                   const SensitivityOptions& opts) {
  Eigen::MatrixXd m = build_M(sol, opts.quad);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);

  const std::vector<DatumId>& ids = sol.problem.datum_ids();
  SensitivityTable table;
  table.ids_ = ids;
  table.fs_ = std::make_shared<const FundamentalSystem>(sol.fundamental);
  const int n = sol.problem.order();
  table.coeffs_.resize(n, static_cast<int>(ids.size()));
  table.targets_.resize(n, static_cast<int>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Eigen::VectorXd t = target_vector(sol, ids[i], opts);
    table.targets_.col(static_cast<int>(i)) = t;
    table.coeffs_.col(static_cast<int>(i)) = lu.solve(t);
  }
  return table;
}

Eigen::VectorXd apply_all_functionals(const Solution& sol,
                                      const SensFunction& z,
                                      const QuadratureRule& rule) {
  const ValidatedProblem& vp = sol.problem;
  std::vector<BoundaryFunctional> ls = functionals(vp);
  Eigen::VectorXd out(vp.order());
  double integral = 0.0;
  bool have_integral = false;
  for (int q = 0; q < vp.order(); ++q) {
    const BoundaryFunctional& L = ls[static_cast<std::size_t>(q)];
    double v = z.derivatives(vp.point(L.point_index))[L.derivative_order];
    if (L.integral_augmented && vp.weight() != 0.0) {
      if (!have_integral) {
        integral = vp.weight() *
                   integrate_over(z.fundamental().augmented(),
                                  [&](double x) { return z.value(x); },
                                  vp.c(), vp.d(), rule);
        have_integral = true;
      }
      v += integral;
    }
    out[q] = v;
  }
  return out;
}

CombinationCheck combination_check(const Solution& sol,
                                   const SensitivityTable& table,
                                   int grid_points) {
  const ValidatedProblem& vp = sol.problem;
  const int n = vp.order();
  const int k = vp.point_count();
  std::vector<double> grid = uniform_grid(vp.point(1), vp.d(), grid_points);

  // All identities are linear combinations of table columns, so combine the
  // expansion coefficients and take the sup of the resulting Z over the grid.
  auto sup_of = [&](const Eigen::VectorXd& coeffs) {
    SensFunction z(table.fundamental(), coeffs);
    double sup = 0.0;
    for (double x : grid) sup = std::max(sup, std::abs(z.value(x)));
    return sup;
  };

  CombinationCheck report;
  for (int l = 1; l <= k; ++l) {
    Eigen::VectorXd derivs = derivatives_through_order(n, vp.rhs(),
                                                       sol.trajectory,
                                                       vp.point(l));
    Eigen::VectorXd combo = table.coefficients(DatumId::x(l));
    for (int i = 0; i < vp.multiplicity(l); ++i)
      combo += derivs[i + 1] * table.coefficients(DatumId::y(i, l));
    report.entries.push_back({"x:" + std::to_string(l), sup_of(combo)});
  }

  Eigen::VectorXd ysum = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < vp.multiplicity(k); ++i)
    ysum += table.coefficients(DatumId::y(i, k));

  double uc = sol.trajectory.eval(vp.c())[0];
  double ud = sol.trajectory.eval(vp.d())[0];
  double integral = nonlocal_integral(sol.trajectory, 0, 1.0, vp.c(), vp.d());

  report.entries.push_back(
      {"c", sup_of(table.coefficients(DatumId::c()) - vp.weight() * uc * ysum)});
  report.entries.push_back(
      {"d", sup_of(table.coefficients(DatumId::d()) + vp.weight() * ud * ysum)});
  report.entries.push_back(
      {"p", sup_of(table.coefficients(DatumId::p()) + integral * ysum)});

  for (const auto& e : report.entries)
    report.max_residual = std::max(report.max_residual, e.sup_residual);
  return report;
}

}  // namespace bvpsens
