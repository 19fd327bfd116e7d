#include "bvpsens/functional.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bvpsens/errors.hpp"

namespace bvpsens {

std::vector<double> segment_breakpoints(const Trajectory& traj, double c,
                                        double d) {
  std::vector<double> bp;
  bp.push_back(c);
  for (const Trajectory::Step& s : traj.steps()) {
    double b = std::max(s.x0, s.x1);
    if (b > c && b < d) bp.push_back(b);
  }
  std::sort(bp.begin(), bp.end());
  bp.push_back(d);
  return bp;
}

void gauss_legendre_nodes(int q, std::vector<double>& nodes,
                          std::vector<double>& weights) {
  if (q < 2) throw std::invalid_argument("quadrature needs >= 2 nodes");
  nodes.assign(static_cast<std::size_t>(q), 0.0);
  weights.assign(static_cast<std::size_t>(q), 0.0);
  const int half = (q + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton on the Legendre polynomial P_q from the Chebyshev-like guess.
    double t = std::cos(M_PI * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= q; ++k) {
        double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = -t;
    nodes[static_cast<std::size_t>(q - 1 - i)] = t;
    double w = 2.0 / ((1.0 - t * t) * dp * dp);
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(q - 1 - i)] = w;
  }
}

double integrate_over(const Trajectory& traj,
                      const std::function<double(double)>& f, double c,
                      double d, const QuadratureRule& rule) {
  if (c > d) throw std::invalid_argument("integral limits must satisfy c <= d");
  if (c == d) return 0.0;
  if (c < traj.lo() || d > traj.hi()) {
    std::ostringstream os;
    os << "integration interval [" << c << ", " << d
       << "] outside trajectory span [" << traj.lo() << ", " << traj.hi()
       << "]";
    throw SpanError(os.str());
  }
  std::vector<double> nodes, weights;
  gauss_legendre_nodes(rule.nodes_per_segment, nodes, weights);
  std::vector<double> bp = segment_breakpoints(traj, c, d);
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
    const double lo = bp[s], hi = bp[s + 1];
    if (!(hi > lo)) continue;
    const double mid = 0.5 * (lo + hi);
    const double halfwidth = 0.5 * (hi - lo);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      acc += weights[i] * f(mid + halfwidth * nodes[i]);
    total += halfwidth * acc;
  }
  return total;
}

double nonlocal_integral(const Trajectory& traj, int component, double p,
                         double c, double d, const QuadratureRule& rule) {
  if (component < 0 || component >= traj.dimension())
    throw std::invalid_argument("component index out of range");
  if (p == 0.0) return 0.0;
  return p * integrate_over(
                 traj, [&](double x) { return traj.eval(x)[component]; }, c, d,
                 rule);
}

}  // namespace bvpsens
