#include "bvpsens/boundary.hpp"

#include <Eigen/LU>
#include <cmath>
#include <sstream>

#include "bvpsens/errors.hpp"

namespace bvpsens {

std::vector<BoundaryFunctional> functionals(const ValidatedProblem& vp) {
  std::vector<BoundaryFunctional> out;
  out.reserve(static_cast<std::size_t>(vp.order()));
  const int k = vp.point_count();
  for (int j = 1; j <= k; ++j)
    for (int i = 0; i < vp.multiplicity(j); ++i)
      out.push_back({j, i, j == k});
  return out;
}

double apply_functional(const BoundaryFunctional& L, const Trajectory& traj,
                        int base_component, const ValidatedProblem& vp,
                        const QuadratureRule& rule) {
  double v = traj.eval(vp.point(L.point_index))[base_component +
                                                L.derivative_order];
  if (L.integral_augmented)
    v += nonlocal_integral(traj, base_component, vp.weight(), vp.c(), vp.d(),
                           rule);
  return v;
}

Eigen::MatrixXd functional_matrix(const ValidatedProblem& vp,
                                  const FundamentalSystem& fs,
                                  const QuadratureRule& rule) {
  const int n = vp.order();
  std::vector<BoundaryFunctional> ls = functionals(vp);
  Eigen::MatrixXd m(n, n);
  for (int j = 0; j < n; ++j)
    for (int q = 0; q < n; ++q)
      m(q, j) = apply_functional(ls[static_cast<std::size_t>(q)],
                                 fs.augmented(), fs.column_base(j), vp, rule);
  return m;
}

void check_disconjugacy(const Eigen::MatrixXd& m) {
  double det = m.determinant();
  double row_norm_product = 1.0;
  for (int q = 0; q < m.rows(); ++q)
    row_norm_product *= m.row(q).norm();
  if (std::abs(det) < 1e-10 * row_norm_product || row_norm_product == 0.0) {
    std::ostringstream os;
    os << "boundary-functional matrix M is numerically singular (det = " << det
       << ", Hadamard bound = " << row_norm_product
       << "); the uniqueness hypotheses fail for this problem";
    throw DisconjugacyViolation(os.str());
  }
}

}  // namespace bvpsens
