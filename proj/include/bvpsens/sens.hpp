#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "bvpsens/boundary.hpp"
#include "bvpsens/shoot.hpp"

namespace bvpsens {

struct SensitivityOptions {
  QuadratureRule quad{};
  /// Use the alternative published sign convention -p*u(c) / +p*u(d) for the
  /// c and d boundary targets instead of the Leibniz-rule signs.
  bool printed_cd_signs = false;
};

/// A solution Z(x) = sum_j c_j alpha_j(x) of the variational equation,
/// expanded in the fundamental basis of a converged Solution.
class SensFunction {
 public:
  SensFunction(std::shared_ptr<const FundamentalSystem> fs,
               Eigen::VectorXd coeffs)
      : fs_(std::move(fs)), coeffs_(std::move(coeffs)) {}

  double value(double x) const;                 // Z(x)
  Eigen::VectorXd derivatives(double x) const;  // Z^(i)(x), i = 0..n-1

  const Eigen::VectorXd& coefficients() const { return coeffs_; }
  const FundamentalSystem& fundamental() const { return *fs_; }

 private:
  std::shared_ptr<const FundamentalSystem> fs_;
  Eigen::VectorXd coeffs_;
};

/// The boundary-functional matrix along the converged solution; throws
/// DisconjugacyViolation when numerically singular.
Eigen::MatrixXd build_M(const Solution& sol, const QuadratureRule& rule = {});

/// Required functional values t_q = L_q(Z) for the sensitivity with respect
/// to one boundary datum.
Eigen::VectorXd target_vector(const Solution& sol, const DatumId& id,
                              const SensitivityOptions& opts = {});

/// Solve M c = target for one datum.
SensFunction solve_sensitivity(const Solution& sol, const DatumId& id,
                               const SensitivityOptions& opts = {});

/// All n + k + 3 sensitivities sharing one LU factorization and one
/// fundamental system.
class SensitivityTable {
 public:
  const std::vector<DatumId>& ids() const { return ids_; }
  SensFunction function(const DatumId& id) const;
  Eigen::VectorXd coefficients(const DatumId& id) const;
  Eigen::VectorXd target(const DatumId& id) const;
  std::shared_ptr<const FundamentalSystem> fundamental() const { return fs_; }

 private:
  friend SensitivityTable all_sensitivities(const Solution& sol,
                                            const SensitivityOptions& opts);
  int index_of(const DatumId& id) const;
  std::vector<DatumId> ids_;
  Eigen::MatrixXd coeffs_;   // n x (n+k+3), one column per datum
  Eigen::MatrixXd targets_;  // n x (n+k+3)
  std::shared_ptr<const FundamentalSystem> fs_;
};

SensitivityTable all_sensitivities(const Solution& sol,
                                   const SensitivityOptions& opts = {});

/// L_q(z) for all n functionals, evaluating z directly (dense values plus
/// quadrature), independent of the linear solve that produced it.
Eigen::VectorXd apply_all_functionals(const Solution& sol,
                                      const SensFunction& z,
                                      const QuadratureRule& rule = {});

/// Residuals of the identities tying the sensitivities together: each X_l
/// is the combination -sum_i u^(i+1)(x_l) Y_il, and C, D, P are multiples
/// of sum_i Y_ik. Reported as sup norms on a uniform grid over [x_1, d].
struct CombinationCheck {
  struct Entry {
    std::string name;
    double sup_residual;
  };
  std::vector<Entry> entries;
  double max_residual = 0.0;
};

CombinationCheck combination_check(const Solution& sol,
                                   const SensitivityTable& table,
                                   int grid_points = 101);

}  // namespace bvpsens
