#pragma once

#include <Eigen/Core>
#include <string>
#include <string_view>
#include <vector>

#include "bvpsens/expr.hpp"

namespace bvpsens {

/// The boundary value problem
///   y^(n) = f(x, y, y', ..., y^(n-1))  on (a, b),
///   y^(i)(x_j) = y_ij                  for 0 <= i <= m_j-1, 1 <= j <= k-1,
///   y^(i)(x_k) + \int_c^d p y dx = y_ik  for 0 <= i <= m_k-1,
/// with sum(m_j) = n and a < x_1 < ... < x_k < c < d < b.
struct ProblemSpec {
  int n = 0;
  double a = 0.0, b = 0.0;
  std::vector<double> points;              // x_1..x_k
  std::vector<int> multiplicities;         // m_1..m_k
  std::vector<std::vector<double>> data;   // data[j-1][i] = y_ij
  double p = 0.0;
  double c = 0.0, d = 0.0;
  Expr rhs;
};

/// Catalog of test problems: "t1_linear" (f = 0, exact solution u(x) = x)
/// and "t2_pendulum" (f = -sin(y0)).
ProblemSpec builtin_problem(std::string_view name);

/// Names one boundary datum of the problem: a data value y_rl, a boundary
/// point x_l, an integral limit c or d, or the weight p.
class DatumId {
 public:
  enum class Kind { Y, X, C, D, P };

  static DatumId y(int r, int l) { return DatumId(Kind::Y, r, l); }
  static DatumId x(int l) { return DatumId(Kind::X, 0, l); }
  static DatumId c() { return DatumId(Kind::C, 0, 0); }
  static DatumId d() { return DatumId(Kind::D, 0, 0); }
  static DatumId p() { return DatumId(Kind::P, 0, 0); }

  Kind kind() const { return kind_; }
  int r() const { return r_; }
  int l() const { return l_; }

  /// "y:<r>:<l>", "x:<l>", "c", "d" or "p".
  std::string label() const;

  /// Inverse of label(). Throws ConfigError on anything else.
  static DatumId parse(std::string_view text);

  friend bool operator==(const DatumId& a, const DatumId& b) {
    return a.kind_ == b.kind_ && a.r_ == b.r_ && a.l_ == b.l_;
  }
  friend bool operator!=(const DatumId& a, const DatumId& b) {
    return !(a == b);
  }

 private:
  DatumId(Kind kind, int r, int l) : kind_(kind), r_(r), l_(l) {}
  Kind kind_;
  int r_;
  int l_;
};

/// A ProblemSpec whose invariants have all been checked, together with the
/// flat deterministic enumeration of its boundary data. Immutable and
/// freely shareable.
class ValidatedProblem {
 public:
  const ProblemSpec& spec() const { return spec_; }

  int order() const { return spec_.n; }                       // n
  int point_count() const { return static_cast<int>(spec_.points.size()); }  // k
  double a() const { return spec_.a; }
  double b() const { return spec_.b; }
  double point(int l) const { return spec_.points[l - 1]; }   // x_l, 1-based
  int multiplicity(int l) const { return spec_.multiplicities[l - 1]; }
  double datum(int i, int l) const { return spec_.data[l - 1][i]; }  // y_il
  double weight() const { return spec_.p; }
  double c() const { return spec_.c; }
  double d() const { return spec_.d; }
  const Expr& rhs() const { return spec_.rhs; }

  /// All boundary data ids: Y(r,l) in (l,r)-lexicographic order, then
  /// X(1)..X(k), then C, D, P. Size n + k + 3.
  const std::vector<DatumId>& datum_ids() const { return ids_; }

  /// The n data values y_il in the same (l,r) order as the Y ids.
  const Eigen::VectorXd& flat_data() const { return flat_data_; }

  double datum_value(const DatumId& id) const;

  /// Copy of the spec with one datum shifted by delta (not revalidated).
  ProblemSpec with_datum(const DatumId& id, double delta) const;

  /// max |y_il|; scales Newton's convergence tolerance.
  double data_scale() const { return flat_data_.size() ? flat_data_.cwiseAbs().maxCoeff() : 0.0; }

  friend bool operator==(const ValidatedProblem& a, const ValidatedProblem& b);

 private:
  friend ValidatedProblem validate(ProblemSpec spec);
  ValidatedProblem() = default;
  ProblemSpec spec_;
  std::vector<DatumId> ids_;
  Eigen::VectorXd flat_data_;
};

/// Check every structural invariant of the spec and compile the datum
/// enumeration. Throws ValidationError naming the violated constraint.
ValidatedProblem validate(ProblemSpec spec);

}  // namespace bvpsens
