#ifndef TWISTFORM_GEOMETRY_HPP
#define TWISTFORM_GEOMETRY_HPP

// Points, singular loci, the cone decomposition F = F_q x_n + F_{q+1} of
// X_s, tangent lines and strangeness, and the automorphism conditions.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "twistform/degeneration.hpp"
#include "twistform/error.hpp"
#include "twistform/gf_tower.hpp"
#include "twistform/twisted_linear.hpp"

namespace twistform {

inline constexpr std::uint64_t kPointBudget = std::uint64_t{1} << 24;

/// Scales v so its first nonzero coordinate is 1.
inline Vec normalize_point(const Field& f, Vec v) {
  std::size_t i = 0;
  while (i < v.size() && v[i] == 0) ++i;
  if (i == v.size()) fail(ErrorKind::InvalidArgument, "zero vector is not a projective point");
  const Code inv = f.inv(v[i]);
  for (auto& c : v) c = f.mul(c, inv);
  return v;
}

/// Calls visit(point) for every point of P^{dim-1}(f) in lexicographic order
/// of normalized coordinates.
inline void for_each_projective_point(const FieldPtr& f, std::size_t dim, const std::function<void(const Vec&)>& visit) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < dim; ++i) {
    total *= f->order();
    if (total > kPointBudget) fail(ErrorKind::Budget, "point enumeration exceeds 2^24 vectors");
  }
  Vec v(dim, 0);
  for (std::size_t lead = dim; lead-- > 0;) {
    std::fill(v.begin(), v.end(), 0);
    v[lead] = 1;
    while (true) {
      visit(v);
      std::size_t k = dim;
      while (k-- > lead + 1) {
        if (++v[k] < f->order()) break;
        v[k] = 0;
      }
      if (k == lead) break;
    }
  }
}

inline Matrix lift(const Matrix& a, const FieldPtr& field) { return embed(a, Embedding::canonical(a.field(), field)); }

/// Projective points of X_A over `field` (which must contain A's field).
inline std::vector<Vec> enum_points(const Matrix& a, std::uint64_t q, const FieldPtr& field) {
  const Matrix al = lift(a, field);
  std::vector<Vec> out;
  for_each_projective_point(field, a.rows(), [&](const Vec& x) {
    if (form_value(al, q, x, x) == 0) out.push_back(x);
  });
  return out;
}

inline std::uint64_t count_points(const Matrix& a, std::uint64_t q, const FieldPtr& field) {
  const Matrix al = lift(a, field);
  std::uint64_t count = 0;
  for_each_projective_point(field, a.rows(), [&](const Vec& x) {
    if (form_value(al, q, x, x) == 0) ++count;
  });
  return count;
}

/// Points with A x^(q) = 0: x = k^(1/q) for k in the kernel of A.
inline std::vector<Vec> singular_points(const Matrix& a, std::uint64_t q, const FieldPtr& field) {
  const Matrix al = lift(a, field);
  const auto ker = rank_kernel(al).kernel;
  std::set<Vec> pts;
  if (ker.empty()) return {};
  const Field& f = *field;
  for_each_projective_point(field, ker.size(), [&](const Vec& c) {
    Vec k(a.rows(), 0);
    for (std::size_t i = 0; i < ker.size(); ++i)
      for (std::size_t t = 0; t < k.size(); ++t) k[t] = f.add(k[t], f.mul(c[i], ker[i][t]));
    pts.insert(normalize_point(f, twist_vec(f, k, q, -1)));
  });
  return {pts.begin(), pts.end()};
}

/// Evaluators for the cone decomposition of X_s in P^n.
class ConeData {
 public:
  ConeData(std::size_t s, std::size_t n, std::uint64_t q) : s_(s), n_(n), q_(q) {
    require(n >= 1 && s <= n, ErrorKind::InvalidArgument, "cone data needs n >= 1 and s <= n");
  }

  std::size_t s() const noexcept { return s_; }
  std::size_t n() const noexcept { return n_; }

  /// F_q(y_0..y_{n-1}): 0 for s = n, y_{n-1}^q otherwise.
  Code fq(const Field& f, const Vec& y) const {
    check(y);
    return s_ == n_ ? 0 : f.pow(y[n_ - 1], q_);
  }

  /// F_{q+1}(y_0..y_{n-1}).
  Code fq1(const Field& f, const Vec& y) const {
    check(y);
    Code acc = 0;
    const std::size_t diag = s_ == n_ ? n_ : s_;
    for (std::size_t i = 0; i < diag; ++i) acc = f.add(acc, f.pow(y[i], q_ + 1));
    if (s_ < n_)
      for (std::size_t k = s_; k + 2 <= n_; ++k) acc = f.add(acc, f.mul(f.pow(y[k], q_), y[k + 1]));
    return acc;
  }

  /// Matrix of X_s^{n-2}: diag(I_s, E_{n-s-1}), defined for s <= n-2.
  Matrix vs_matrix(const FieldPtr& f) const {
    if (n_ < 2 || s_ + 2 > n_) fail(ErrorKind::InvalidArgument, "V_s matrix needs s <= n - 2");
    return w_matrix(f, n_ - 2, s_);
  }

 private:
  void check(const Vec& y) const {
    require(y.size() == n_, ErrorKind::InvalidArgument, "cone evaluators take n coordinates");
  }
  std::size_t s_, n_;
  std::uint64_t q_;
};

inline ConeData cone_invariants(std::size_t s, std::size_t n, std::uint64_t q) { return {s, n, q}; }

enum class FiberClass { Empty, Single, Line };

inline std::string to_string(FiberClass c) {
  switch (c) {
    case FiberClass::Empty: return "Empty";
    case FiberClass::Single: return "Single";
    case FiberClass::Line: return "Line";
  }
  return "?";
}

/// Intersection of the line through Q = (y, 0) and P_0 with X_s minus P_0.
inline FiberClass fiber_class(std::size_t s, std::size_t n, std::uint64_t q, const Field& f, const Vec& point) {
  require(point.size() == n + 1, ErrorKind::InvalidArgument, "point must have n + 1 coordinates");
  if (point[n] != 0) fail(ErrorKind::InvalidArgument, "point is not on the hyperplane x_n = 0");
  const ConeData cone(s, n, q);
  const Vec y(point.begin(), point.end() - 1);
  if (cone.fq(f, y) != 0) return FiberClass::Single;
  return cone.fq1(f, y) == 0 ? FiberClass::Line : FiberClass::Empty;
}

/// Number of points (y, mu) with mu in `field` lying on X_s; the direct
/// count behind fiber_class.
inline std::uint64_t fiber_count(std::size_t s, std::size_t n, std::uint64_t q, const FieldPtr& field, const Vec& point) {
  const Matrix w = w_matrix(field, n, s);
  std::uint64_t count = 0;
  Vec x = point;
  for (Code mu = 0; mu < field->order(); ++mu) {
    x[n] = mu;
    if (form_value(w, q, x, x) == 0) ++count;
  }
  return count;
}

struct RoundtripReport {
  std::size_t requested = 0;
  std::size_t passed = 0;
  std::size_t skipped = 0;  // samples with y_{n-1} = 0
  std::vector<Vec> failures;
};

/// Chart points y (y_{n-1} != 0) are mapped to (y, -F_{q+1}(y)/y_{n-1}^q),
/// checked to lie on X_s, and projected back from P_0.
inline RoundtripReport rational_roundtrip(std::size_t s, std::size_t n, std::uint64_t q, const FieldPtr& field,
                                          std::size_t samples, std::uint64_t seed = 0) {
  if (n < 2 || s >= n || (n == 2 && s == 0))
    fail(ErrorKind::InvalidArgument, "rationality needs n >= 2, s < n and (n, s) != (2, 0)");
  const Field& f = *field;
  const ConeData cone(s, n, q);
  const Matrix w = w_matrix(field, n, s);
  std::mt19937_64 rng(seed);
  RoundtripReport rep;
  rep.requested = samples;
  std::size_t guard = 0;
  while (rep.passed + rep.failures.size() < samples) {
    if (++guard > 1000 * (samples + 1)) fail(ErrorKind::Internal, "could not draw chart points");
    Vec y(n);
    for (auto& c : y) c = rng() % f.order();
    if (is_zero_vec(y)) continue;
    if (y[n - 1] == 0) {
      ++rep.skipped;
      continue;
    }
    y = normalize_point(f, y);
    Vec x = y;
    x.push_back(f.neg(f.div(cone.fq1(f, y), f.pow(y[n - 1], q))));
    const bool on_curve = form_value(w, q, x, x) == 0;
    const Vec back = normalize_point(f, Vec(x.begin(), x.end() - 1));
    if (on_curve && back == y)
      ++rep.passed;
    else
      rep.failures.push_back(y);
  }
  return rep;
}

/// Coefficients g = A x^(q) of the tangent hyperplane sum g_i y_i = 0.
inline Vec tangent_hyperplane(const Matrix& a, std::uint64_t q, const Vec& x) {
  const Vec g = mat_vec(a, twist_vec(*a.field(), x, q, 1));
  if (is_zero_vec(g)) fail(ErrorKind::InvalidArgument, "tangent hyperplane at a singular point");
  return g;
}

enum class StrangeOutcome { Center, NoCenter, Inconclusive };

struct StrangenessReport {
  StrangeOutcome outcome = StrangeOutcome::Inconclusive;
  std::optional<Vec> center;
  std::size_t smooth_points = 0;
  std::string note;
};

/// Common point of the tangent lines at the smooth points over `field`,
/// optionally restricted to the points accepted by `component`.
inline StrangenessReport strangeness_center(const Matrix& a, std::uint64_t q, const FieldPtr& field,
                                            const std::function<bool(const Vec&)>& component = {}) {
  require(a.rows() == 3 && a.square(), ErrorKind::InvalidArgument, "strangeness needs a plane curve");
  const Matrix al = lift(a, field);
  std::vector<Vec> tangents;
  for (const auto& x : enum_points(al, q, field)) {
    if (component && !component(x)) continue;
    const Vec g = mat_vec(al, twist_vec(*field, x, q, 1));
    if (!is_zero_vec(g)) tangents.push_back(g);
  }
  StrangenessReport rep;
  rep.smooth_points = tangents.size();
  if (tangents.size() < 3) {
    rep.note = "fewer than 3 smooth points; try a larger field";
    return rep;
  }
  Matrix g(field, tangents.size(), 3);
  for (std::size_t i = 0; i < tangents.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) g(i, j) = tangents[i][j];
  const auto rk = rank_kernel(g);
  if (rk.kernel.empty()) {
    rep.outcome = StrangeOutcome::NoCenter;
  } else if (rk.kernel.size() == 1) {
    rep.outcome = StrangeOutcome::Center;
    rep.center = normalize_point(*field, rk.kernel.front());
  } else {
    rep.note = "all tangent lines coincide";
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Automorphisms.

/// delta with tM W_s M^(q) = delta W_s, if any.
inline std::optional<Code> aut_membership(const Matrix& m, std::size_t s, std::size_t n, std::uint64_t q) {
  require(m.square() && m.rows() == n + 1, ErrorKind::InvalidArgument, "automorphism candidate has wrong size");
  const Matrix w = w_matrix(m.field(), n, s);
  const Matrix c = congruence(w, m, q);
  const Code delta = n == s ? c(0, 0) : c(s + 1, s);
  if (delta == 0 || !(c == w.scaled(delta))) return std::nullopt;
  return delta;
}

struct AutReport {
  bool holds = false;
  std::optional<Code> delta;
  std::string regime;  // "general", "Aut(X_n)" or "Aut(X_{n-1})"
  std::string reason;
  // Equations from block multiplication: (1)-(4) with a^(q), b = 0, d^q = delta.
  std::vector<std::pair<std::string, bool>> equations;
  // The theorem's literal conditions (i)-(v).
  std::vector<std::pair<std::string, bool>> conditions;
  Matrix normalized;  // M scaled so that its (n, n) entry is 1
};

namespace detail {

inline bool is_scalar_identity(const Matrix& m, Code lambda) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != (i == j ? lambda : 0)) return false;
  return true;
}

}  // namespace detail

/// Block-structure test for [M] in Aut(X_s).
///
/// An automorphism fixes the unique singular point P_0, so the last column
/// of M is proportional to e_n and M is first scaled to make it e_n. For
/// s <= n-2 the blocks T, a, b, c, d, e are read off and equations (1)-(6)
/// are evaluated with delta = d^q; the boolean is their conjunction. The
/// literal conditions (i)-(v) are reported alongside. For s = n and s = n-1
/// the explicit group shapes are tested.
inline AutReport aut_structural_check(const Matrix& m, std::size_t s, std::size_t n, std::uint64_t q) {
  require(m.square() && m.rows() == n + 1, ErrorKind::InvalidArgument, "automorphism candidate has wrong size");
  require(s <= n && n >= 1, ErrorKind::InvalidArgument, "s out of range");
  const FieldPtr& fp = m.field();
  const Field& f = *fp;
  AutReport rep;
  for (std::size_t i = 0; i < n; ++i)
    if (m(i, n) != 0) {
      rep.reason = "last column not proportional to e_n (P_0 not fixed)";
      return rep;
    }
  if (m(n, n) == 0) {
    rep.reason = "singular candidate";
    return rep;
  }
  const Matrix mm = m.scaled(f.inv(m(n, n)));
  rep.normalized = mm;

  if (s == n) {
    rep.regime = "Aut(X_n)";
    const Matrix t = mm.block(0, 0, n, n);
    const Matrix g = t.transpose() * twist(t, q, 1);
    const Code lambda = g(0, 0);
    rep.holds = lambda != 0 && detail::is_scalar_identity(g, lambda);
    if (rep.holds) rep.delta = lambda;
    rep.equations.push_back({"tT T^(q) = lambda I", rep.holds});
    if (!rep.holds) rep.reason = "tT T^(q) is not a nonzero scalar matrix";
    return rep;
  }

  if (s + 1 == n) {
    rep.regime = "Aut(X_{n-1})";
    bool shape = true;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; j <= n; ++j) {
        const bool in_t = i < n - 1 && j < n - 1;
        if (!in_t && i != j && mm(i, j) != 0) shape = false;
      }
    const Code beta = mm(n - 1, n - 1);
    const Matrix t = mm.block(0, 0, n - 1, n - 1);
    const Code bq = f.pow(beta, q);
    const bool unitary = beta != 0 && (n == 1 || detail::is_scalar_identity(t.transpose() * twist(t, q, 1), bq));
    rep.equations.push_back({"M = diag(T, beta, 1)", shape});
    rep.equations.push_back({"tT T^(q) = beta^q I", unitary});
    rep.holds = shape && unitary;
    if (rep.holds) rep.delta = bq;
    if (!rep.holds) rep.reason = shape ? "tT T^(q) != beta^q I" : "not of the form diag(T, beta, 1)";
    return rep;
  }

  rep.regime = "general";
  const std::size_t k = n - 1;  // size of T
  const Matrix t = mm.block(0, 0, k, k);
  const Matrix wp = w_matrix(fp, k - 1, s);  // W'_s = diag(I_s, E_{n-s-1})
  Vec a(k), b(k), c(k);
  for (std::size_t i = 0; i < k; ++i) {
    a[i] = mm(i, k);
    b[i] = mm(k, i);
    c[i] = mm(n, i);
  }
  const Code d = mm(k, k);
  const Code e = mm(n, k);
  const Code dq = f.pow(d, q);
  const Code delta = dq;
  const Matrix tq = twist(t, q, 1);
  const Vec aq = twist_vec(f, a, q, 1);

  const bool eq1 = t.transpose() * wp * tq == wp.scaled(delta);
  // r = a W'_s + d e_last
  Vec r(k, 0);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < k; ++i) r[j] = f.add(r[j], f.mul(a[i], wp(i, j)));
  r[k - 1] = f.add(r[k - 1], d);
  Vec rt(k, 0);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < k; ++i) rt[j] = f.add(rt[j], f.mul(r[i], tq(i, j)));
  Vec target(k, 0);
  target[k - 1] = delta;
  const bool eq2 = rt == target;
  const Vec lhs3 = mat_vec(t.transpose() * wp, aq);
  bool eq3 = true;
  for (std::size_t i = 0; i < k; ++i)
    if (f.add(lhs3[i], f.mul(c[i], dq)) != 0) eq3 = false;
  Code v4 = f.mul(e, dq);
  for (std::size_t i = 0; i < k; ++i) v4 = f.add(v4, f.mul(r[i], aq[i]));
  const bool eq4 = v4 == 0;
  const bool eq5 = is_zero_vec(b);
  const bool eq6 = d != 0;  // delta = d^q by definition; it must be nonzero

  rep.equations = {{"(1) tT W' T^(q) = delta W'", eq1},
                   {"(2) [a W' + d e] T^(q) = delta e", eq2},
                   {"(3) tT W' ta^(q) + tc d^q = 0", eq3},
                   {"(4) [a W' + d e] ta^(q) + e d^q = 0", eq4},
                   {"(5) b = 0", eq5},
                   {"(6) d^q = delta != 0", eq6}};
  const bool delta_fixed = f.pow(delta, q) == delta;
  rep.conditions = {{"(i) tT W' T^(q) = delta W', delta = delta^q != 0", eq1 && delta_fixed && delta != 0},
                    {"(ii) d = delta", d == delta},
                    {"(iii) [a W' + d e] T^(q) = delta e", eq2},
                    {"(iv) tT W' ta^(q) + tc d^q = 0", eq3},
                    {"(v) [a W' + d e] ta^(q) + e d^q = 0", eq4}};
  rep.holds = eq1 && eq2 && eq3 && eq4 && eq5 && eq6;
  if (rep.holds) rep.delta = delta;
  if (!rep.holds)
    for (const auto& [name, ok] : rep.equations)
      if (!ok) {
        rep.reason = "fails " + name;
        break;
      }
  return rep;
}

/// True when every literal condition (i)-(v) holds and b = 0.
inline bool literal_conditions_hold(const AutReport& rep) {
  if (rep.regime != "general") return rep.holds;
  if (rep.equations.size() < 5 || !rep.equations[4].second) return false;
  for (const auto& [name, ok] : rep.conditions)
    if (!ok) return false;
  return true;
}

}  // namespace twistform

#endif  // TWISTFORM_GEOMETRY_HPP
