#include <gtest/gtest.h>

#include <random>
#include <set>

#include "twistform/geometry.hpp"

using namespace twistform;

namespace {

std::mt19937_64 rng(53);

// Every point of P^n(f) as a normalized vector, by brute force over F^{n+1}.
std::vector<Vec> all_points(const FieldPtr& f, std::size_t size) {
  std::set<Vec> pts;
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < size; ++i) total *= f->order();
  for (std::uint64_t idx = 1; idx < total; ++idx) {
    Vec v(size);
    std::uint64_t x = idx;
    for (auto& c : v) {
      c = x % f->order();
      x /= f->order();
    }
    pts.insert(normalize_point(*f, v));
  }
  return {pts.begin(), pts.end()};
}

}  // namespace

TEST(Points, SmallCurves) {
  for (unsigned d = 1; d <= 4; ++d) {
    auto f = build_field(2, d);
    auto pts = enum_points(w_matrix(f, 1, 1), 2, f);
    ASSERT_EQ(pts.size(), 1u);
    EXPECT_EQ(pts[0], (Vec{0, 1}));
  }
  auto f4 = build_field(2, 2);
  EXPECT_EQ(enum_points(w_matrix(f4, 1, 0), 2, f4).size(), 2u);
  EXPECT_EQ(enum_points(w_matrix(f4, 2, 2), 2, f4).size(), 13u);
}

TEST(Points, MatchesBruteForce) {
  auto f9 = build_field(3, 2);
  for (int i = 0; i < 5; ++i) {
    Matrix a = random_matrix(f9, 3, 3, rng);
    std::vector<Vec> want;
    for (const auto& x : all_points(f9, 3))
      if (form_value(a, 3, x, x) == 0) want.push_back(x);
    auto got = enum_points(a, 3, f9);
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, want);
  }
}

TEST(Points, Budget) {
  auto f = build_field(2, 8);
  try {
    count_points(w_matrix(f, 3, 1), 2, f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Budget);
  }
}

TEST(SingularPoints, NormalFormsHaveOnlyTheConePoint) {
  for (std::uint64_t q : {2u, 3u}) {
    for (unsigned j = 1; j <= 3; ++j) {
      auto f = build_field(static_cast<std::uint32_t>(q), j);
      for (std::size_t n = 1; n <= 4; ++n)
        for (std::size_t s = 0; s <= n; ++s) {
          auto sp = singular_points(w_matrix(f, n, s), q, f);
          Vec p0(n + 1, 0);
          p0[n] = 1;
          ASSERT_EQ(sp.size(), 1u);
          EXPECT_EQ(sp[0], p0);
        }
    }
  }
}

TEST(SingularPoints, FullRankAndRankOne) {
  auto f4 = build_field(2, 2);
  EXPECT_TRUE(singular_points(random_invertible(f4, 3, rng), 2, f4).empty());
  // diag(1,0,0): kernel is the plane x_0 = 0, so every point with x_0 = 0.
  auto sp = singular_points(Matrix::diagonal(f4, {1, 0, 0}), 2, f4);
  EXPECT_EQ(sp.size(), 5u);
  for (const auto& x : sp) EXPECT_EQ(x[0], 0u);
}

TEST(Cone, DecompositionIdentity) {
  // F(y, x_n) = F_q(y) x_n + F_{q+1}(y) on all of F^{n+1}, F = F_{q^2}.
  for (std::uint64_t q : {2u, 3u}) {
    auto f = build_field(static_cast<std::uint32_t>(q), 2);
    for (std::size_t n = 1; n <= 3; ++n)
      for (std::size_t s = 0; s <= n; ++s) {
        const ConeData cone = cone_invariants(s, n, q);
        const Matrix w = w_matrix(f, n, s);
        for (const auto& x : all_points(f, n + 1)) {
          const Vec y(x.begin(), x.end() - 1);
          const Code rhs = f->add(f->mul(cone.fq(*f, y), x[n]), cone.fq1(*f, y));
          EXPECT_EQ(form_value(w, q, x, x), rhs);
        }
      }
  }
}

TEST(Cone, Invariants) {
  auto f4 = build_field(2, 2);
  const ConeData full = cone_invariants(3, 3, 2);
  for (Code a = 0; a < 4; ++a) EXPECT_EQ(full.fq(*f4, {a, 1, a}), 0u);
  const ConeData c = cone_invariants(1, 3, 2);
  EXPECT_EQ(c.fq(*f4, {1, 1, 2}), f4->pow(2, 2));
  EXPECT_EQ(c.vs_matrix(f4), w_matrix(f4, 1, 1));
  EXPECT_EQ(cone_invariants(0, 4, 2).vs_matrix(f4), e_matrix(f4, 3));
  EXPECT_THROW(cone_invariants(2, 3, 2).vs_matrix(f4), Error);
}

TEST(Fiber, TrichotomyMatchesLineEnumeration) {
  for (std::uint64_t q : {2u, 3u}) {
    auto f = build_field(static_cast<std::uint32_t>(q), 2);
    for (std::size_t n = 1; n <= 3; ++n)
      for (std::size_t s = 0; s <= n; ++s)
        for (auto y : all_points(f, n)) {
          y.push_back(0);
          const FiberClass c = fiber_class(s, n, q, *f, y);
          const std::uint64_t on = fiber_count(s, n, q, f, y);
          const std::uint64_t want = c == FiberClass::Single ? 1 : c == FiberClass::Line ? f->order() : 0;
          EXPECT_EQ(on, want);
        }
  }
}

TEST(Fiber, Examples) {
  auto f4 = build_field(2, 2);
  EXPECT_EQ(fiber_class(1, 2, 2, *f4, {0, 1, 0}), FiberClass::Single);
  EXPECT_EQ(fiber_class(2, 2, 2, *f4, {1, 1, 0}), FiberClass::Line);  // 1 + 1 = 0
  EXPECT_EQ(fiber_class(2, 2, 2, *f4, {1, 0, 0}), FiberClass::Empty);
  EXPECT_THROW(fiber_class(1, 2, 2, *f4, {0, 1, 1}), Error);
}

TEST(Rational, Roundtrip) {
  auto f16 = build_field(2, 4);
  auto rep = rational_roundtrip(1, 2, 2, f16, 20, 3);
  EXPECT_EQ(rep.passed, 20u);
  EXPECT_TRUE(rep.failures.empty());
  EXPECT_GT(rep.skipped, 0u);
  EXPECT_THROW(rational_roundtrip(0, 2, 2, f16, 5), Error);
  EXPECT_THROW(rational_roundtrip(2, 2, 2, f16, 5), Error);
}

TEST(Tangent, Examples) {
  auto f4 = build_field(2, 2);
  const Matrix x1 = w_matrix(f4, 2, 1);
  EXPECT_EQ(tangent_hyperplane(x1, 2, {0, 1, 0}), (Vec{0, 0, 1}));
  for (const auto& x : enum_points(x1, 2, f4)) {
    if (x == Vec{0, 0, 1}) {
      EXPECT_THROW(tangent_hyperplane(x1, 2, x), Error);
      continue;
    }
    EXPECT_EQ(tangent_hyperplane(x1, 2, x)[1], 0u);
  }
  // Fermat: (1, w, 0) with w^3 = -1 = 1 and w != 1.
  const Matrix fermat = Matrix::identity(f4, 3);
  const Vec p = {1, 2, 0};
  ASSERT_EQ(form_value(fermat, 2, p, p), 0u);
  const Vec g = tangent_hyperplane(fermat, 2, p);
  Code dot = 0;
  for (std::size_t i = 0; i < 3; ++i) dot = f4->add(dot, f4->mul(g[i], p[i]));
  EXPECT_EQ(dot, 0u);
}

TEST(Strangeness, CenterOfX1AndFermat) {
  for (unsigned d : {2u, 4u}) {
    auto f = build_field(2, d);
    auto r = strangeness_center(w_matrix(f, 2, 1), 2, f);
    ASSERT_EQ(r.outcome, StrangeOutcome::Center);
    EXPECT_EQ(*r.center, (Vec{0, 1, 0}));
  }
  auto f16 = build_field(2, 4);
  EXPECT_EQ(strangeness_center(Matrix::identity(f16, 3), 2, f16).outcome, StrangeOutcome::NoCenter);
  auto f2 = build_field(2, 1);
  EXPECT_EQ(strangeness_center(w_matrix(f2, 2, 1), 2, f2).outcome, StrangeOutcome::Inconclusive);
}

TEST(Strangeness, X0PerComponent) {
  // X_0: x_0^q x_1 + x_1^q x_2 = 0. The line x_1 = 0 is a component.
  auto f16 = build_field(2, 4);
  const Matrix x0 = w_matrix(f16, 2, 0);
  auto line = strangeness_center(x0, 2, f16, [](const Vec& x) { return x[1] == 0; });
  EXPECT_NE(line.outcome, StrangeOutcome::Center);
  auto rest = strangeness_center(x0, 2, f16, [](const Vec& x) { return x[1] != 0; });
  EXPECT_NE(rest.outcome, StrangeOutcome::Inconclusive);
}

TEST(Automorphisms, MembershipExamples) {
  auto f4 = build_field(2, 2);
  for (std::size_t s = 0; s <= 2; ++s) EXPECT_EQ(aut_membership(Matrix::identity(f4, 3), s, 2, 2), Code{1});
  Matrix m = Matrix::identity(f4, 3);
  m(2, 0) = 2;
  m(2, 1) = 3;
  EXPECT_EQ(aut_membership(m, 2, 2, 2), Code{1});
  EXPECT_TRUE(aut_structural_check(m, 2, 2, 2).holds);
  const Matrix swap = permutation_matrix(f4, {2, 1, 0});
  for (std::size_t s = 0; s <= 1; ++s) {
    EXPECT_FALSE(aut_membership(swap, s, 2, 2).has_value());
    EXPECT_FALSE(aut_structural_check(swap, s, 2, 2).holds);
  }
}

TEST(Automorphisms, SpecialShapes) {
  auto f4 = build_field(2, 2);
  // diag(T, beta, 1) with tT T^(q) = beta^q I, n = 2, s = 1: T = (t), t^3 = beta^2.
  for (Code beta = 1; beta < 4; ++beta)
    for (Code t = 1; t < 4; ++t) {
      const Matrix m = Matrix::diagonal(f4, {t, beta, 1});
      const bool shape = f4->pow(t, 3) == f4->pow(beta, 2);
      EXPECT_EQ(aut_structural_check(m, 1, 2, 2).holds, shape);
      EXPECT_EQ(aut_membership(m, 1, 2, 2).has_value(), shape);
    }
}

TEST(Automorphisms, AgreementOverGL3F2) {
  auto f2 = build_field(2, 1);
  for (const auto& m : enumerate_gl(f2, 3, 1 << 10))
    for (std::size_t s = 0; s <= 2; ++s)
      EXPECT_EQ(aut_membership(m, s, 2, 2).has_value(), aut_structural_check(m, s, 2, 2).holds);
}

TEST(Automorphisms, LiteralConditionIiIsTooStrong) {
  // n = 2, s = 0, q = 2. M = [[g^2, a, 0], [0, g, 0], [0, e, 1]] with
  // d a^q + e d^q = 0 stabilizes W_0 with delta = g^2, yet d = g != delta.
  auto f4 = build_field(2, 2);
  const Code g = 2, g2 = f4->mul(g, g);
  const Code a = 1;
  const Code e = f4->div(f4->mul(g, f4->pow(a, 2)), f4->pow(g, 2));  // char 2: minus is plus
  const Matrix m = Matrix::from_rows(f4, {{g2, a, 0}, {0, g, 0}, {0, e, 1}});
  auto delta = aut_membership(m, 0, 2, 2);
  ASSERT_TRUE(delta.has_value());
  EXPECT_EQ(*delta, g2);
  const AutReport rep = aut_structural_check(m, 0, 2, 2);
  EXPECT_TRUE(rep.holds);
  EXPECT_FALSE(literal_conditions_hold(rep));
  EXPECT_FALSE(rep.conditions[1].second);  // d = delta
}
