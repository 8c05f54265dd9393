#ifndef TWISTFORM_FULLRANK_HPP
#define TWISTFORM_FULLRANK_HPP

// Full-rank normalization tA A T^(q) = I in three stages: a Lang equation
// removes the asymmetry (tA)^-1 A^(q), Gram-Schmidt diagonalizes the
// resulting q-Hermitian matrix, and (q+1)-th roots scale the diagonal.

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twistform/error.hpp"
#include "twistform/gf_tower.hpp"
#include "twistform/twisted_linear.hpp"

namespace twistform {

/// P(A) = (tA)^-1 A^(q).
inline Matrix asymmetry(const Matrix& a, std::uint64_t q) {
  require(a.square(), ErrorKind::InvalidArgument, "asymmetry of non-square matrix");
  return mat_inverse(a.transpose()) * twist(a, q, 1);
}

struct LangSolution {
  Matrix t;             // over embedding.target()
  Embedding embedding;  // input field -> field of t
};

namespace detail {

// Q^{s^{k-1}} ... Q^s Q with s = (x -> x^{q^2}).
inline Matrix twisted_norm(const Matrix& q_mat, std::uint64_t q, std::uint64_t k) {
  Matrix n = q_mat;
  for (std::uint64_t i = 1; i < k; ++i) n = twist(n, q, 2) * q_mat;
  return n;
}

}  // namespace detail

/// Invertible T with T^(q^2) = Q T, over the first field F_{p^{LM}}
/// (L = lcm(d, 2e), M = 1, 2, ...) where one exists.
///
/// Over F_{p^D} a solution exists iff the twisted norm of Q over the cyclic
/// group generated by x -> x^{q^2} is the identity, so candidates failing
/// that test are skipped before any extension is built.
inline LangSolution lang_solve(const Matrix& q_mat, std::uint64_t q, unsigned max_degree = kDefaultMaxDegree) {
  require(q_mat.square(), ErrorKind::InvalidArgument, "lang_solve needs a square matrix");
  if (!is_invertible(q_mat)) fail(ErrorKind::SingularMatrix, "lang_solve needs an invertible matrix");
  const FieldPtr& base = q_mat.field();
  const unsigned e = twist_exponent(*base, q);
  const unsigned step = std::lcm(base->degree(), 2 * e);
  const std::size_t n = q_mat.rows();
  std::string last = "no candidate passed the norm test";
  for (unsigned deg = step; deg <= max_degree; deg += step) {
    const std::uint64_t k = deg / std::gcd(deg, 2 * e);
    if (!detail::twisted_norm(q_mat, q, k).is_identity()) continue;
    const FieldPtr amb = deg == base->degree() ? base : build_field(base->characteristic(), deg, max_degree);
    Embedding emb = Embedding::canonical(base, amb);
    if (q_mat.is_identity()) return {Matrix::identity(amb, n), emb};
    const Matrix qe = embed(q_mat, emb);
    const auto fixed = semilinear_fixed_space(qe, q, 2);
    if (fixed.size() < n) {
      last = "fixed space of dimension " + std::to_string(fixed.size()) + " over degree " + std::to_string(deg);
      continue;
    }
    Matrix t(amb, n, n);
    for (std::size_t c = 0; c < n; ++c) t.set_col(c, fixed[c]);
    if (!(twist(t, q, 2) == qe * t) || !is_invertible(t)) fail(ErrorKind::Internal, "Lang solution failed its post-check");
    return {std::move(t), std::move(emb)};
  }
  fail(ErrorKind::ExtensionCap, "Lang equation unsolved up to degree " + std::to_string(max_degree) + " (" + last + ")");
}

struct HermitizeResult {
  Matrix a_h;  // congruence(embed(A), t1, q), q-Hermitian
  Matrix t1;
  Embedding embedding;
};

inline bool is_q_hermitian(const Matrix& h, std::uint64_t q) { return h.transpose() == twist(h, q, 1); }

inline HermitizeResult hermitize(const Matrix& a, std::uint64_t q, unsigned max_degree = kDefaultMaxDegree) {
  if (!is_invertible(a)) fail(ErrorKind::RankMismatch, "hermitize needs a full-rank matrix");
  auto sol = lang_solve(mat_inverse(asymmetry(a, q)), q, max_degree);
  Matrix a_h = congruence(embed(a, sol.embedding), sol.t, q);
  if (!is_q_hermitian(a_h, q)) fail(ErrorKind::Internal, "hermitize output is not q-Hermitian");
  return {std::move(a_h), std::move(sol.t), std::move(sol.embedding)};
}

struct DiagonalizeResult {
  Matrix d;
  Matrix t2;
};

/// Gram-Schmidt for a q-Hermitian invertible matrix over a field containing
/// F_{q^2}. Transformations stay F_{q^2}-rational so each intermediate
/// matrix is again q-Hermitian.
inline DiagonalizeResult hermitian_diagonalize(const Matrix& h, std::uint64_t q) {
  require(h.square(), ErrorKind::InvalidArgument, "hermitian_diagonalize needs a square matrix");
  if (!is_q_hermitian(h, q)) fail(ErrorKind::InvalidArgument, "input is not q-Hermitian");
  if (!is_invertible(h)) fail(ErrorKind::SingularMatrix, "input is singular");
  const FieldPtr& f = h.field();
  const std::size_t n = h.rows();
  Matrix cur = h;
  Matrix t = Matrix::identity(f, n);
  auto apply = [&](const Matrix& s) {
    cur = congruence_unchecked(cur, s, q);
    t = t * s;
  };
  auto swap_to = [&](std::size_t i, std::size_t k) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::swap(perm[i], perm[k]);
    apply(permutation_matrix(f, perm));
  };
  std::optional<Embedding> small;
  for (std::size_t k = 0; k < n; ++k) {
    if (cur(k, k) == 0) {
      std::size_t i = k + 1;
      while (i < n && cur(i, i) == 0) ++i;
      if (i < n) {
        swap_to(i, k);
      } else {
        std::size_t pi = n, pj = n;
        for (std::size_t a = k; a < n && pi == n; ++a)
          for (std::size_t b = a + 1; b < n; ++b)
            if (cur(a, b) != 0) {
              pi = a;
              pj = b;
              break;
            }
        if (pi == n) fail(ErrorKind::SingularMatrix, "degenerate Hermitian block");
        if (!small) {
          const unsigned e = twist_exponent(*f, q);
          require(f->degree() % (2 * e) == 0, ErrorKind::FieldMismatch, "field does not contain F_{q^2}");
          small = Embedding::canonical(build_field(f->characteristic(), 2 * e, f->degree()), f);
        }
        bool found = false;
        for (const auto& lam_small : enumerate_elements(small->source())) {
          const Code lam = (*small)(lam_small.code());
          Vec v(n, 0);
          v[pi] = 1;
          v[pj] = lam;
          if (form_value(cur, q, v, v) == 0) continue;
          Matrix s = Matrix::identity(f, n);
          s(pj, pi) = lam;
          apply(s);
          found = true;
          break;
        }
        if (!found) fail(ErrorKind::Internal, "no anisotropic vector found");
        if (pi != k) swap_to(pi, k);
      }
    }
    const Code c = cur(k, k);
    const Code c_inv = f->inv(c);
    Matrix s = Matrix::identity(f, n);
    bool any = false;
    for (std::size_t j = k + 1; j < n; ++j) {
      if (cur(k, j) == 0) continue;
      const Code mu = f->frobenius(f->mul(cur(k, j), c_inv), -static_cast<std::int64_t>(twist_exponent(*f, q)));
      s(k, j) = f->neg(mu);
      any = true;
    }
    if (any) apply(s);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && cur(i, j) != 0) fail(ErrorKind::Internal, "diagonalization left an off-diagonal entry");
  return {std::move(cur), std::move(t)};
}

struct ScaleResult {
  Matrix t3;            // over embedding.target()
  Embedding embedding;  // field of D -> field of t3
};

/// diag(mu_i) with mu_i^{q+1} = c_i^{-1}.
inline ScaleResult scale_diagonal_to_identity(const Matrix& d, std::uint64_t q, unsigned max_degree = kDefaultMaxDegree) {
  require(d.square(), ErrorKind::InvalidArgument, "scale needs a square matrix");
  const std::size_t n = d.rows();
  for (std::size_t i = 0; i < n; ++i) {
    if (d(i, i) == 0) fail(ErrorKind::SingularMatrix, "zero diagonal entry");
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && d(i, j) != 0) fail(ErrorKind::InvalidArgument, "matrix is not diagonal");
  }
  Embedding emb = Embedding::identity(d.field());
  while (true) {
    const FieldPtr& f = emb.target();
    Vec mu(n);
    bool restart = false;
    for (std::size_t i = 0; i < n && !restart; ++i) {
      const FieldElem c(f, f->inv(emb(d(i, i))));
      auto r = kth_root(c, q + 1, max_degree);
      if (!same_field(r.root.field(), f)) {
        emb = emb.then(r.embedding);
        restart = true;
      } else {
        mu[i] = r.root.code();
      }
    }
    if (!restart) return {Matrix::diagonal(f, mu), emb};
  }
}

/// Normalization witness: congruence(embed(A), t, q) = I over `field`.
struct FullRankWitness {
  Matrix t;
  FieldPtr field;
  Embedding embedding;  // field of A -> field
  Matrix t1, t2, t3;    // stage transformations, all over `field`
  Matrix hermitian, diagonal;
};

inline FullRankWitness normalize_full_rank(const Matrix& a, std::uint64_t q, unsigned max_degree = kDefaultMaxDegree) {
  require(a.square(), ErrorKind::InvalidArgument, "normalize needs a square matrix");
  if (!is_invertible(a)) fail(ErrorKind::RankMismatch, "matrix is not of full rank");
  auto h = hermitize(a, q, max_degree);
  auto dg = hermitian_diagonalize(h.a_h, q);
  auto sc = scale_diagonal_to_identity(dg.d, q, max_degree);
  const Embedding& tail = sc.embedding;
  FullRankWitness w{
      Matrix{}, tail.target(), h.embedding.then(tail),
      embed(h.t1, tail), embed(dg.t2, tail), sc.t3,
      embed(h.a_h, tail), embed(dg.d, tail)};
  w.t = w.t1 * w.t2 * w.t3;
  if (!congruence(embed(a, w.embedding), w.t, q).is_identity())
    fail(ErrorKind::Internal, "full-rank normalization failed its post-check");
  return w;
}

}  // namespace twistform

#endif  // TWISTFORM_FULLRANK_HPP
