#include "bvpsens/ivp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bvpsens/errors.hpp"

namespace bvpsens {

namespace {

// Dormand-Prince 5(4) tableau, error weights and dense-output weights
// (Hairer, Norsett, Wanner, Solving ODEs I).
constexpr double a21 = 0.2;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

constexpr double kSafe = 0.9;
constexpr double kBeta = 0.04;
constexpr double kFacMin = 0.2;   // smallest growth factor h_new/h
constexpr double kFacMax = 10.0;  // largest growth factor
constexpr double kBlowUpNorm = 1e12;
constexpr double kUnderflowFraction = 1e-14;
constexpr long kMaxSteps = 1000000;

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                  const Eigen::VectorXd& y1, const Tolerances& tol) {
  double sum = 0.0;
  for (int i = 0; i < err.size(); ++i) {
    double sk =
        tol.atol + tol.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    double q = err[i] / sk;
    sum += q * q;
  }
  return std::sqrt(sum / static_cast<double>(err.size()));
}

double initial_step(const OdeRhs& rhs, double x0, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& k1, double dir, double span,
                    const Tolerances& tol) {
  double dnf = 0.0, dny = 0.0;
  for (int i = 0; i < y.size(); ++i) {
    double sk = tol.atol + tol.rtol * std::abs(y[i]);
    double q = k1[i] / sk;
    dnf += q * q;
    q = y[i] / sk;
    dny += q * q;
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
  h = std::min(h, span);

  // explicit Euler probe for the second derivative scale
  Eigen::VectorXd y1 = y + dir * h * k1;
  Eigen::VectorXd k2(y.size());
  rhs(x0 + dir * h, y1, k2);
  double der2 = 0.0;
  for (int i = 0; i < y.size(); ++i) {
    double sk = tol.atol + tol.rtol * std::abs(y[i]);
    double q = (k2[i] - k1[i]) / sk;
    der2 += q * q;
  }
  der2 = std::sqrt(der2) / h;
  double der12 = std::max(der2, std::sqrt(dnf));
  double h1 = (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3)
                               : std::pow(0.01 / der12, 0.2);
  h = std::min(std::min(100.0 * h, h1), span);
  return dir * h;
}

std::string span_message(const char* what, double x) {
  std::ostringstream os;
  os << what << " near x = " << x;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(std::vector<Step> steps) : steps_(std::move(steps)) {
  if (steps_.empty()) return;
  std::sort(steps_.begin(), steps_.end(), [](const Step& a, const Step& b) {
    return std::min(a.x0, a.x1) < std::min(b.x0, b.x1);
  });
  dim_ = static_cast<int>(steps_.front().y0.size());
  step_lo_.reserve(steps_.size());
  for (const Step& s : steps_) step_lo_.push_back(std::min(s.x0, s.x1));
  lo_ = step_lo_.front();
  hi_ = std::max(steps_.back().x0, steps_.back().x1);
}

const Trajectory::Step& Trajectory::locate(double x) const {
  if (steps_.empty() || x < lo_ || x > hi_) {
    std::ostringstream os;
    os << "abscissa " << x << " outside trajectory span [" << lo_ << ", "
       << hi_ << "]";
    throw SpanError(os.str());
  }
  auto it = std::upper_bound(step_lo_.begin(), step_lo_.end(), x);
  std::size_t idx = static_cast<std::size_t>(it - step_lo_.begin());
  if (idx > 0) --idx;
  return steps_[idx];
}

Eigen::VectorXd Trajectory::eval(double x) const {
  const Step& s = locate(x);
  if (x == s.x0) return s.y0;
  if (x == s.x1) return s.y1;
  double h = s.x1 - s.x0;
  double th = (x - s.x0) / h;
  double th1 = 1.0 - th;
  // c0 + th*(c1 + th1*(c2 + th*(c3 + th1*c4)))
  return s.coef.col(0) +
         th * (s.coef.col(1) +
               th1 * (s.coef.col(2) + th * (s.coef.col(3) + th1 * s.coef.col(4))));
}

Eigen::VectorXd Trajectory::eval_derivative(double x) const {
  const Step& s = locate(x);
  double h = s.x1 - s.x0;
  double th = (x - s.x0) / h;
  // d/dth of c1*th + c2*th(1-th) + c3*th^2(1-th) + c4*th^2(1-th)^2
  double b1 = 1.0;
  double b2 = 1.0 - 2.0 * th;
  double b3 = th * (2.0 - 3.0 * th);
  double b4 = th * (2.0 - th * (6.0 - 4.0 * th));
  return (b1 * s.coef.col(1) + b2 * s.coef.col(2) + b3 * s.coef.col(3) +
          b4 * s.coef.col(4)) /
         h;
}

Trajectory Trajectory::head(int m) const {
  std::vector<Step> out;
  out.reserve(steps_.size());
  for (const Step& s : steps_)
    out.push_back({s.x0, s.x1, s.y0.head(m), s.y1.head(m), s.coef.topRows(m)});
  return Trajectory(std::move(out));
}

Trajectory Trajectory::merge(const Trajectory& a, const Trajectory& b) {
  std::vector<Step> all = a.steps_;
  all.insert(all.end(), b.steps_.begin(), b.steps_.end());
  return Trajectory(std::move(all));
}

// ---------------------------------------------------------------------------
// Integrator

Trajectory integrate(const OdeRhs& rhs, double x0, const Eigen::VectorXd& u0,
                     double x_end, const Tolerances& tol) {
  if (x0 == x_end)
    throw std::invalid_argument("integration span is empty (x0 == x_end)");
  if (!u0.allFinite())
    throw std::invalid_argument("initial state must be finite");

  const double dir = (x_end > x0) ? 1.0 : -1.0;
  const double span = std::abs(x_end - x0);
  const double hmin = kUnderflowFraction * span;
  const int dim = static_cast<int>(u0.size());

  Eigen::VectorXd y = u0;
  Eigen::VectorXd k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
  Eigen::VectorXd ytmp(dim), ynext(dim), err(dim);

  double t = x0;
  rhs(t, y, k1);
  double h = initial_step(rhs, t, y, k1, dir, span, tol);
  double facold = 1e-4;

  std::vector<Trajectory::Step> steps;
  long nsteps = 0;

  while (true) {
    if (++nsteps > kMaxSteps)
      throw ExtensionFailure(span_message("step limit exceeded", t));
    if (std::abs(h) < hmin)
      throw ExtensionFailure(span_message("step size underflow", t));

    bool last = false;
    if ((t + 1.01 * h - x_end) * dir > 0.0) {
      h = x_end - t;
      last = true;
    }

    ytmp = y + h * (a21 * k1);
    rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, ytmp, k6);
    ynext = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs(t + h, ynext, k7);

    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double en = ynext.allFinite() ? error_norm(err, y, ynext, tol)
                                  : std::numeric_limits<double>::infinity();

    if (!std::isfinite(en)) {
      h *= 0.2;
      continue;
    }

    double fac11 = std::pow(en, 0.2 - kBeta * 0.75);
    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::max(1.0 / kFacMax, std::min(1.0 / kFacMin, fac / kSafe));
    double hnext = h / fac;

    if (en > 1.0) {
      h /= std::min(1.0 / kFacMin, fac11 / kSafe);
      continue;
    }

    facold = std::max(en, 1e-4);
    double tnext = last ? x_end : t + h;

    Eigen::MatrixXd coef(dim, 5);
    coef.col(0) = y;
    coef.col(1) = ynext - y;
    coef.col(2) = h * k1 - coef.col(1);
    coef.col(3) = coef.col(1) - h * k7 - coef.col(2);
    coef.col(4) = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    steps.push_back({t, tnext, y, ynext, std::move(coef)});

    if (ynext.lpNorm<Eigen::Infinity>() > kBlowUpNorm)
      throw ExtensionFailure(span_message("state norm exceeds 1e12", tnext));

    if (last) break;
    t = tnext;
    y.swap(ynext);
    k1.swap(k7);
    h = hnext;
  }
  return Trajectory(std::move(steps));
}

Trajectory integrate_two_sided(const OdeRhs& rhs, double x0,
                               const Eigen::VectorXd& u0, double lo, double hi,
                               const Tolerances& tol) {
  const double left = std::min(lo, hi);
  const double right = std::max(lo, hi);
  Trajectory fwd, bwd;
  if (right > x0) fwd = integrate(rhs, x0, u0, right, tol);
  if (left < x0) bwd = integrate(rhs, x0, u0, left, tol);
  if (fwd.steps().empty()) return bwd;
  if (bwd.steps().empty()) return fwd;
  return Trajectory::merge(bwd, fwd);
}

OdeRhs companion_rhs(int n, const Expr& f) {
  return [n, f](double x, const Eigen::VectorXd& u, Eigen::VectorXd& du) {
    du.resize(n);
    for (int i = 0; i + 1 < n; ++i) du[i] = u[i + 1];
    du[n - 1] = eval_real(f, x, u.data(), n);
  };
}

// ---------------------------------------------------------------------------
// FundamentalSystem

FundamentalSystem::FundamentalSystem(Trajectory augmented, double x_base, int n)
    : aug_(std::move(augmented)), x_base_(x_base), n_(n) {}

Eigen::MatrixXd FundamentalSystem::phi(double x) const {
  Eigen::VectorXd w = aug_.eval(x);
  return Eigen::Map<const Eigen::MatrixXd>(w.data() + n_, n_, n_);
}

Eigen::VectorXd FundamentalSystem::alpha(int j, double x) const {
  return aug_.eval(x).segment(column_base(j), n_);
}

Eigen::VectorXd FundamentalSystem::state(double x) const {
  return aug_.eval(x).head(n_);
}

std::pair<Trajectory, FundamentalSystem> integrate_fundamental(
    int n, const Expr& f, double x_base, const Eigen::VectorXd& u0, double lo,
    double hi, const Tolerances& tol) {
  OdeRhs rhs = [n, f, grad = Eigen::VectorXd(n)](
                   double x, const Eigen::VectorXd& w,
                   Eigen::VectorXd& dw) mutable {
    dw.resize(n + n * n);
    for (int i = 0; i + 1 < n; ++i) dw[i] = w[i + 1];
    double value;
    eval_gradient(f, x, w.data(), n, value, grad.data());
    dw[n - 1] = value;
    Eigen::Map<const Eigen::MatrixXd> phi(w.data() + n, n, n);
    Eigen::Map<Eigen::MatrixXd> dphi(dw.data() + n, n, n);
    if (n > 1) dphi.topRows(n - 1) = phi.bottomRows(n - 1);
    dphi.row(n - 1) = grad.transpose() * phi;
  };

  Eigen::VectorXd w0(n + n * n);
  w0.head(n) = u0;
  Eigen::Map<Eigen::MatrixXd>(w0.data() + n, n, n) =
      Eigen::MatrixXd::Identity(n, n);

  Trajectory aug = integrate_two_sided(rhs, x_base, w0,
                                       std::min(lo, x_base),
                                       std::max(hi, x_base), tol);
  Trajectory state = aug.head(n);
  return {std::move(state), FundamentalSystem(std::move(aug), x_base, n)};
}

std::pair<Trajectory, FundamentalSystem> integrate_fundamental(
    const ValidatedProblem& vp, double x_base, const Eigen::VectorXd& u0,
    double lo, double hi, const Tolerances& tol) {
  double wide_lo = std::min(lo, vp.point(1));
  double wide_hi = std::max(hi, vp.d());
  return integrate_fundamental(vp.order(), vp.rhs(), x_base, u0, wide_lo,
                               wide_hi, tol);
}

Eigen::VectorXd derivatives_through_order(int n, const Expr& f,
                                          const Trajectory& state, double x) {
  Eigen::VectorXd out(n + 1);
  Eigen::VectorXd u = state.eval(x);
  out.head(n) = u.head(n);
  out[n] = eval_real(f, x, u.data(), n);
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, int count) {
  if (count <= 1) return {lo};
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    g[static_cast<std::size_t>(i)] = lo + i * (hi - lo) / (count - 1);
  g.back() = hi;
  return g;
}

}  // namespace bvpsens
