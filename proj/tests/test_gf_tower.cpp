#include <gtest/gtest.h>

#include <set>

#include "twistform/gf_tower.hpp"

using namespace twistform;

namespace {

// Naive polynomial arithmetic over F_p for the irreducibility oracle.
using P = std::vector<std::uint32_t>;

P naive_mod(P a, const P& m, std::uint32_t p) {
  while (a.size() >= m.size()) {
    const std::uint32_t c = a.back();
    const std::size_t shift = a.size() - m.size();
    for (std::size_t i = 0; i < m.size(); ++i) a[shift + i] = (a[shift + i] + p * p - c * m[i]) % p;
    a.pop_back();
  }
  while (!a.empty() && a.back() == 0) a.pop_back();
  return a;
}

std::vector<P> monic_polys(std::uint32_t p, unsigned d) {
  std::vector<P> out;
  std::uint64_t total = 1;
  for (unsigned i = 0; i < d; ++i) total *= p;
  // Enumerate with c_0 as the most significant digit.
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    P f(d + 1, 0);
    std::uint64_t x = idx;
    for (unsigned i = d; i-- > 0;) {
      f[i] = static_cast<std::uint32_t>(x % p);
      x /= p;
    }
    f[d] = 1;
    out.push_back(f);
  }
  return out;
}

bool naive_irreducible(const P& f, std::uint32_t p) {
  const unsigned d = static_cast<unsigned>(f.size() - 1);
  if (d == 1) return true;
  for (unsigned k = 1; 2 * k <= d; ++k)
    for (const auto& g : monic_polys(p, k))
      if (naive_mod(f, g, p).empty()) return false;
  return true;
}

}  // namespace

TEST(FieldConstruction, PrimeFieldsAndF4) {
  auto f2 = build_field(2, 1);
  EXPECT_EQ(f2->modulus(), (std::vector<std::uint32_t>{0, 1}));
  EXPECT_EQ(f2->order(), 2u);
  auto f4 = build_field(2, 2);
  EXPECT_EQ(f4->modulus(), (std::vector<std::uint32_t>{1, 1, 1}));
  EXPECT_EQ(build_field(3, 1)->order(), 3u);
}

TEST(FieldConstruction, SmallestIrreducibleMatchesTrialDivision) {
  for (auto [p, d] : {std::pair<std::uint32_t, unsigned>{2, 2}, {2, 3}, {2, 4}, {2, 5}, {2, 6}, {3, 2}, {3, 3}, {3, 4}, {5, 2}, {5, 3}}) {
    P expected;
    for (const auto& f : monic_polys(p, d))
      if (naive_irreducible(f, p)) {
        expected = f;
        break;
      }
    EXPECT_EQ(build_field(p, d)->modulus(), expected) << "p=" << p << " d=" << d;
  }
}

TEST(FieldConstruction, Errors) {
  EXPECT_THROW(build_field(4, 1), Error);
  EXPECT_THROW(build_field(2, 0), Error);
  try {
    build_field(2, 30, 24);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ExtensionCap);
  }
}

TEST(FieldArithmetic, F4Examples) {
  auto f = build_field(2, 2);
  const FieldElem g = FieldElem::generator(f), one = FieldElem::one(f);
  EXPECT_EQ(g * g, g + one);
  EXPECT_EQ(g.inv(), g + one);
  EXPECT_EQ(g + FieldElem::zero(f), g);
  EXPECT_EQ(g * g.inv(), one);
}

TEST(FieldArithmetic, AxiomsExhaustive) {
  for (auto [p, d] : {std::pair<std::uint32_t, unsigned>{2, 3}, {3, 2}, {5, 1}, {7, 1}}) {
    auto f = build_field(p, d);
    const Code n = f->order();
    for (Code a = 0; a < n; ++a) {
      EXPECT_EQ(f->add(a, f->neg(a)), 0u);
      if (a) {
        EXPECT_EQ(f->mul(a, f->inv(a)), 1u);
      }
      EXPECT_EQ(f->pow(a, n), a);
      for (Code b = 0; b < n; ++b) {
        EXPECT_EQ(f->add(a, b), f->add(b, a));
        EXPECT_EQ(f->mul(a, b), f->mul(b, a));
        for (Code c = 0; c < n; ++c) {
          EXPECT_EQ(f->mul(a, f->add(b, c)), f->add(f->mul(a, b), f->mul(a, c)));
          EXPECT_EQ(f->mul(f->mul(a, b), c), f->mul(a, f->mul(b, c)));
        }
      }
    }
  }
  EXPECT_THROW(build_field(2, 2)->inv(0), Error);
}

TEST(FieldArithmetic, CoefficientsRoundTrip) {
  auto f = build_field(3, 3);
  for (Code a = 0; a < f->order(); ++a) {
    auto c = f->coeffs(a);
    EXPECT_EQ(c.size(), 3u);
    EXPECT_EQ(f->from_coeffs(c), a);
  }
}

TEST(Frobenius, F4Examples) {
  auto f = build_field(2, 2);
  const FieldElem g = FieldElem::generator(f), one = FieldElem::one(f);
  EXPECT_EQ(frobenius_pow(g, 2, 1), g + one);
  EXPECT_EQ(frobenius_pow(g + one, 2, -1), g);
  EXPECT_EQ(frobenius_pow(g, 2, 0), g);
}

TEST(Frobenius, InverseAndPower) {
  auto f = build_field(3, 4);
  for (Code a = 0; a < f->order(); ++a) {
    EXPECT_EQ(f->frobenius(a, 1), f->pow(a, 3));
    for (std::int64_t k = -5; k <= 5; ++k) EXPECT_EQ(f->frobenius(f->frobenius(a, k), -k), a);
  }
}

TEST(Enumeration, LexicographicOrder) {
  auto f4 = build_field(2, 2);
  std::vector<std::vector<std::uint32_t>> got;
  for (const auto& x : enumerate_elements(f4)) got.push_back(x.coeffs());
  EXPECT_EQ(got, (std::vector<std::vector<std::uint32_t>>{{0, 0}, {1, 0}, {0, 1}, {1, 1}}));
  std::vector<Code> f3;
  for (const auto& x : enumerate_elements(build_field(3, 1))) f3.push_back(x.code());
  EXPECT_EQ(f3, (std::vector<Code>{0, 1, 2}));
  std::size_t count = 0;
  for ([[maybe_unused]] const auto& x : enumerate_elements(build_field(2, 1))) ++count;
  EXPECT_EQ(count, 2u);
}

TEST(Embedding, Homomorphisms) {
  for (auto [p, a, b] : {std::tuple<std::uint32_t, unsigned, unsigned>{2, 1, 2}, {2, 2, 4}, {3, 1, 2}, {2, 2, 6}, {3, 2, 4}}) {
    auto src = build_field(p, a), dst = build_field(p, b);
    const Embedding e = Embedding::canonical(src, dst);
    EXPECT_EQ(e(Code{0}), 0u);
    EXPECT_EQ(e(Code{1}), 1u);
    std::set<Code> image;
    for (Code x = 0; x < src->order(); ++x) {
      image.insert(e(x));
      for (Code y = 0; y < src->order(); ++y) {
        EXPECT_EQ(e(src->add(x, y)), dst->add(e(x), e(y)));
        EXPECT_EQ(e(src->mul(x, y)), dst->mul(e(x), e(y)));
      }
    }
    EXPECT_EQ(image.size(), src->order());
  }
}

TEST(Embedding, GeneratorOfF4IntoF16IsSmallestRoot) {
  auto f4 = build_field(2, 2), f16 = build_field(2, 4);
  Code smallest = 0;
  for (Code x = 0; x < 16; ++x)
    if (f16->add(f16->add(f16->mul(x, x), x), 1) == 0) {
      smallest = x;
      break;
    }
  ASSERT_NE(smallest, 0u);
  EXPECT_EQ(embed(FieldElem::generator(f4), f16).code(), smallest);
  EXPECT_THROW(Embedding::from_image(f4, f16, 1), Error);
  EXPECT_THROW(Embedding::canonical(f4, build_field(2, 3)), Error);
}

TEST(KthRoot, Examples) {
  auto f4 = build_field(2, 2);
  auto r1 = kth_root(FieldElem::one(f4), 3);
  EXPECT_EQ(r1.root.field()->degree(), 2u);
  EXPECT_EQ(r1.root.pow(3), FieldElem::one(f4));

  const FieldElem g = FieldElem::generator(f4);
  auto r = kth_root(g, 3);
  EXPECT_EQ(r.root.field()->degree(), 6u);
  EXPECT_EQ(r.root.pow(3), r.embedding(g));
  // No cube root in F_4 or F_16.
  for (unsigned d : {2u, 4u}) {
    auto f = build_field(2, d);
    const Code gi = embed(g, f).code();
    for (Code y = 0; y < f->order(); ++y) EXPECT_NE(f->pow(y, 3), gi);
  }

  auto f9 = build_field(3, 2);
  const FieldElem x(f9, 5);
  auto same = kth_root(x, 1);
  EXPECT_EQ(same.root, x);
}

TEST(KthRoot, PostConditionAndCap) {
  auto f = build_field(3, 2);
  for (Code a = 0; a < f->order(); ++a)
    for (std::uint64_t k : {2u, 4u, 5u, 8u}) {
      auto r = kth_root(FieldElem(f, a), k);
      EXPECT_EQ(r.root.pow(k), r.embedding(FieldElem(f, a)));
    }
  try {
    kth_root(FieldElem::generator(build_field(2, 2)), 3, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ExtensionCap);
  }
}

TEST(Polynomials, SplitRootsMatchesScan) {
  auto f16 = build_field(2, 4);
  const Poly f(f16, {1, 1, 1});
  std::vector<Code> scan;
  for (Code x = 0; x < 16; ++x)
    if (f.eval(x) == 0) scan.push_back(x);
  EXPECT_EQ(split_roots(f), scan);
  EXPECT_EQ(scan.size(), 2u);
}
