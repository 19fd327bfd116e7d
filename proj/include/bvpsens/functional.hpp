#pragma once

#include <functional>
#include <vector>

#include "bvpsens/ivp.hpp"

namespace bvpsens {

/// Composite Gauss-Legendre rule over [c, d], with panels aligned to the
/// integrator's accepted steps so each panel sees one smooth interpolant.
struct QuadratureRule {
  int nodes_per_segment = 5;  // >= 2; exact through degree 2q-1 per panel
};

/// Panel boundaries for [c, d]: c, every step boundary strictly inside, d.
std::vector<double> segment_breakpoints(const Trajectory& traj, double c,
                                        double d);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre_nodes(int q, std::vector<double>& nodes,
                          std::vector<double>& weights);

/// Integral of a scalar callable over [c, d] with the rule's panels/nodes.
double integrate_over(const Trajectory& traj,
                      const std::function<double(double)>& f, double c,
                      double d, const QuadratureRule& rule = {});

/// p * integral over [c, d] of one trajectory component; the nonlocal term
/// of the boundary conditions. Returns exactly 0 when p == 0.
double nonlocal_integral(const Trajectory& traj, int component, double p,
                         double c, double d, const QuadratureRule& rule = {});

}  // namespace bvpsens
