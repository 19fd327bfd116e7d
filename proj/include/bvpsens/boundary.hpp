#pragma once

#include <Eigen/Core>
#include <vector>

#include "bvpsens/functional.hpp"
#include "bvpsens/ivp.hpp"
#include "bvpsens/problem.hpp"

namespace bvpsens {

/// One row of the boundary conditions: evaluate z^(i) at x_j, adding the
/// nonlocal term p * int_c^d z when j = k.
struct BoundaryFunctional {
  int point_index;        // j, 1-based
  int derivative_order;   // i
  bool integral_augmented;
};

/// The n functionals in deterministic order: (j=1, i=0..m_1-1), ...,
/// (j=k, i=0..m_k-1, integral-augmented).
std::vector<BoundaryFunctional> functionals(const ValidatedProblem& vp);

/// Apply L to the scalar function whose derivatives 0..n-1 occupy trajectory
/// components base_component..base_component+n-1. The state block uses
/// base 0; fundamental column j uses FundamentalSystem::column_base(j).
double apply_functional(const BoundaryFunctional& L, const Trajectory& traj,
                        int base_component, const ValidatedProblem& vp,
                        const QuadratureRule& rule = {});

/// The full n x n boundary-functional matrix, entry (q, j) = L_q(alpha_j).
Eigen::MatrixXd functional_matrix(const ValidatedProblem& vp,
                                  const FundamentalSystem& fs,
                                  const QuadratureRule& rule = {});

/// Numeric surrogate for the uniqueness hypotheses: throws
/// DisconjugacyViolation when |det M| falls below 1e-10 times the product of
/// the row norms (the Hadamard bound).
void check_disconjugacy(const Eigen::MatrixXd& m);

}  // namespace bvpsens
