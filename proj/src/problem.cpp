#include "bvpsens/problem.hpp"

#include <cmath>
#include <sstream>

#include "bvpsens/errors.hpp"

namespace bvpsens {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

ProblemSpec builtin_problem(std::string_view name) {
  ProblemSpec s;
  s.n = 2;
  s.a = -1.0;
  s.b = 4.0;
  s.points = {0.0, 1.0};
  s.multiplicities = {1, 1};
  s.c = 1.5;
  s.d = 2.5;
  if (name == "t1_linear") {
    s.data = {{0.0}, {3.0}};
    s.p = 1.0;
    s.rhs = parse_expr("0");
  } else if (name == "t2_pendulum") {
    s.data = {{0.0}, {0.5}};
    s.p = 0.1;
    s.rhs = parse_expr("-sin(y0)");
  } else {
    throw ConfigError("unknown builtin problem '" + std::string(name) + "'");
  }
  return s;
}

std::string DatumId::label() const {
  switch (kind_) {
    case Kind::Y:
      return "y:" + std::to_string(r_) + ":" + std::to_string(l_);
    case Kind::X:
      return "x:" + std::to_string(l_);
    case Kind::C: return "c";
    case Kind::D: return "d";
    case Kind::P: return "p";
  }
  return "?";
}

DatumId DatumId::parse(std::string_view text) {
  auto bad = [&] {
    return ConfigError("bad datum '" + std::string(text) +
                       "' (expected y:<r>:<l>, x:<l>, c, d or p)");
  };
  if (text == "c") return DatumId::c();
  if (text == "d") return DatumId::d();
  if (text == "p") return DatumId::p();
  auto parse_int = [&](std::string_view part) {
    if (part.empty()) throw bad();
    int v = 0;
    for (char ch : part) {
      if (ch < '0' || ch > '9') throw bad();
      v = v * 10 + (ch - '0');
    }
    return v;
  };
  if (text.rfind("y:", 0) == 0) {
    std::string_view rest = text.substr(2);
    auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw bad();
    int r = parse_int(rest.substr(0, colon));
    int l = parse_int(rest.substr(colon + 1));
    if (l < 1) throw bad();
    return DatumId::y(r, l);
  }
  if (text.rfind("x:", 0) == 0) {
    int l = parse_int(text.substr(2));
    if (l < 1) throw bad();
    return DatumId::x(l);
  }
  throw bad();
}

double ValidatedProblem::datum_value(const DatumId& id) const {
  switch (id.kind()) {
    case DatumId::Kind::Y:
      return spec_.data.at(static_cast<std::size_t>(id.l() - 1))
          .at(static_cast<std::size_t>(id.r()));
    case DatumId::Kind::X:
      return spec_.points.at(static_cast<std::size_t>(id.l() - 1));
    case DatumId::Kind::C: return spec_.c;
    case DatumId::Kind::D: return spec_.d;
    case DatumId::Kind::P: return spec_.p;
  }
  return 0.0;
}

ProblemSpec ValidatedProblem::with_datum(const DatumId& id, double delta) const {
  ProblemSpec s = spec_;
  switch (id.kind()) {
    case DatumId::Kind::Y:
      s.data.at(static_cast<std::size_t>(id.l() - 1))
          .at(static_cast<std::size_t>(id.r())) += delta;
      break;
    case DatumId::Kind::X:
      s.points.at(static_cast<std::size_t>(id.l() - 1)) += delta;
      break;
    case DatumId::Kind::C: s.c += delta; break;
    case DatumId::Kind::D: s.d += delta; break;
    case DatumId::Kind::P: s.p += delta; break;
  }
  return s;
}

bool operator==(const ValidatedProblem& a, const ValidatedProblem& b) {
  const ProblemSpec& sa = a.spec_;
  const ProblemSpec& sb = b.spec_;
  return sa.n == sb.n && sa.a == sb.a && sa.b == sb.b &&
         sa.points == sb.points && sa.multiplicities == sb.multiplicities &&
         sa.data == sb.data && sa.p == sb.p && sa.c == sb.c && sa.d == sb.d &&
         sa.rhs == sb.rhs && a.ids_ == b.ids_ &&
         a.flat_data_ == b.flat_data_;
}

ValidatedProblem validate(ProblemSpec spec) {
  auto fail = [](const std::string& msg) { throw ValidationError(msg); };

  if (spec.n < 2) fail("order n must be >= 2 (got n = " + std::to_string(spec.n) + ")");
  const int k = static_cast<int>(spec.points.size());
  if (k < 2) fail("at least two boundary points required (k >= 2, got k = " +
                  std::to_string(k) + ")");
  if (static_cast<int>(spec.multiplicities.size()) != k)
    fail("multiplicities must have one entry per boundary point");

  int msum = 0;
  for (int j = 0; j < k; ++j) {
    if (spec.multiplicities[j] < 1)
      fail("every multiplicity m_j must be >= 1 (m_" + std::to_string(j + 1) +
           " = " + std::to_string(spec.multiplicities[j]) + ")");
    msum += spec.multiplicities[j];
  }
  if (msum != spec.n)
    fail("sum of multiplicities " + std::to_string(msum) + " != n = " +
         std::to_string(spec.n));

  for (double v : {spec.a, spec.b, spec.p, spec.c, spec.d})
    if (!std::isfinite(v)) fail("all problem reals must be finite");
  for (double v : spec.points)
    if (!std::isfinite(v)) fail("all boundary points must be finite");

  // a < x_1 < ... < x_k < c < d < b
  if (!(spec.a < spec.points.front()))
    fail("ordering violation: a < x_1 fails (a = " + num(spec.a) + ", x_1 = " +
         num(spec.points.front()) + ")");
  for (int j = 0; j + 1 < k; ++j)
    if (!(spec.points[j] < spec.points[j + 1]))
      fail("ordering violation: x_" + std::to_string(j + 1) + " < x_" +
           std::to_string(j + 2) + " fails");
  if (!(spec.points.back() < spec.c))
    fail("ordering violation: x_k < c fails (x_k = " + num(spec.points.back()) +
         ", c = " + num(spec.c) + ")");
  if (!(spec.c < spec.d))
    fail("ordering violation: c < d fails (c = " + num(spec.c) + ", d = " +
         num(spec.d) + ")");
  if (!(spec.d < spec.b))
    fail("ordering violation: d < b fails (d = " + num(spec.d) + ", b = " +
         num(spec.b) + ")");

  if (static_cast<int>(spec.data.size()) != k)
    fail("data must have one row per boundary point (got " +
         std::to_string(spec.data.size()) + " rows, k = " + std::to_string(k) +
         ")");
  for (int j = 0; j < k; ++j) {
    if (static_cast<int>(spec.data[j].size()) != spec.multiplicities[j])
      fail("data row " + std::to_string(j + 1) + " must hold m_" +
           std::to_string(j + 1) + " = " +
           std::to_string(spec.multiplicities[j]) + " values (got " +
           std::to_string(spec.data[j].size()) + ")");
    for (double v : spec.data[j])
      if (!std::isfinite(v)) fail("all boundary data must be finite");
  }

  if (spec.rhs.empty()) fail("rhs expression is missing");
  int my = spec.rhs.max_y_index();
  if (my >= spec.n)
    fail("unknown variable in rhs: y" + std::to_string(my) + " (only y0..y" +
         std::to_string(spec.n - 1) + " are bound for n = " +
         std::to_string(spec.n) + ")");

  ValidatedProblem vp;
  vp.spec_ = std::move(spec);
  vp.flat_data_.resize(vp.spec_.n);
  int idx = 0;
  for (int l = 1; l <= k; ++l)
    for (int r = 0; r < vp.spec_.multiplicities[l - 1]; ++r) {
      vp.ids_.push_back(DatumId::y(r, l));
      vp.flat_data_[idx++] = vp.spec_.data[l - 1][r];
    }
  for (int l = 1; l <= k; ++l) vp.ids_.push_back(DatumId::x(l));
  vp.ids_.push_back(DatumId::c());
  vp.ids_.push_back(DatumId::d());
  vp.ids_.push_back(DatumId::p());
  return vp;
}

}  // namespace bvpsens
