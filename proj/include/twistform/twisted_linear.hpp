#ifndef TWISTFORM_TWISTED_LINEAR_HPP
#define TWISTFORM_TWISTED_LINEAR_HPP

// Dense matrices over a Field and the q-twist primitives.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twistform/error.hpp"
#include "twistform/gf_tower.hpp"

namespace twistform {

using Vec = std::vector<Code>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(FieldPtr field, std::size_t rows, std::size_t cols)
      : field_(std::move(field)), rows_(rows), cols_(cols), a_(rows * cols, 0) {}
  Matrix(FieldPtr field, std::size_t rows, std::size_t cols, std::vector<Code> entries)
      : field_(std::move(field)), rows_(rows), cols_(cols), a_(std::move(entries)) {
    require(a_.size() == rows_ * cols_, ErrorKind::Malformed, "entry count does not match dimensions");
    for (Code c : a_) require(field_->contains(c), ErrorKind::Malformed, "entry out of field range");
  }

  static Matrix identity(FieldPtr field, std::size_t n) {
    Matrix m(std::move(field), n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  static Matrix from_rows(FieldPtr field, const std::vector<std::vector<Code>>& rows) {
    require(!rows.empty(), ErrorKind::Malformed, "empty matrix");
    const std::size_t c = rows.front().size();
    std::vector<Code> flat;
    flat.reserve(rows.size() * c);
    for (const auto& r : rows) {
      require(r.size() == c, ErrorKind::Malformed, "ragged rows");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return {std::move(field), rows.size(), c, std::move(flat)};
  }

  static Matrix diagonal(FieldPtr field, const Vec& d) {
    Matrix m(std::move(field), d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  const FieldPtr& field() const noexcept { return field_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  const std::vector<Code>& entries() const noexcept { return a_; }

  Code& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  Code operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  Vec row(std::size_t i) const { return Vec(a_.begin() + i * cols_, a_.begin() + (i + 1) * cols_); }
  Vec col(std::size_t j) const {
    Vec out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
  }
  void set_col(std::size_t j, const Vec& v) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
  }

  bool is_zero() const {
    for (Code c : a_)
      if (c != 0) return false;
    return true;
  }

  bool is_identity() const {
    if (!square()) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        if ((*this)(i, j) != (i == j ? 1u : 0u)) return false;
    return true;
  }

  Matrix transpose() const {
    Matrix t(field_, cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    Matrix b(field_, nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }

  void set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

  Matrix scaled(Code c) const {
    Matrix out = *this;
    for (auto& x : out.a_) x = field_->mul(x, c);
    return out;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    require_same_field(a.field_, b.field_);
    require(a.cols_ == b.rows_, ErrorKind::InvalidArgument, "matrix product dimension mismatch");
    const Field& f = *a.field_;
    Matrix out(a.field_, a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Code x = a(i, k);
        if (x == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) {
          const Code y = b(k, j);
          if (y != 0) out(i, j) = f.add(out(i, j), f.mul(x, y));
        }
      }
    return out;
  }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    require_same_field(a.field_, b.field_);
    require(a.rows_ == b.rows_ && a.cols_ == b.cols_, ErrorKind::InvalidArgument, "matrix sum dimension mismatch");
    Matrix out = a;
    for (std::size_t i = 0; i < out.a_.size(); ++i) out.a_[i] = a.field_->add(a.a_[i], b.a_[i]);
    return out;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    require_same_field(a.field_, b.field_);
    require(a.rows_ == b.rows_ && a.cols_ == b.cols_, ErrorKind::InvalidArgument, "matrix difference dimension mismatch");
    Matrix out = a;
    for (std::size_t i = 0; i < out.a_.size(); ++i) out.a_[i] = a.field_->sub(a.a_[i], b.a_[i]);
    return out;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && same_field(a.field_, b.field_) && a.a_ == b.a_;
  }

 private:
  FieldPtr field_;
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Code> a_;
};

inline Vec mat_vec(const Matrix& a, const Vec& v) {
  require(a.cols() == v.size(), ErrorKind::InvalidArgument, "matrix-vector dimension mismatch");
  const Field& f = *a.field();
  Vec out(a.rows(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] = f.add(out[i], f.mul(a(i, j), v[j]));
  return out;
}

inline Vec twist_vec(const Field& f, const Vec& v, std::uint64_t q, std::int64_t i) {
  const std::int64_t k = static_cast<std::int64_t>(twist_exponent(f, q)) * i;
  Vec out(v.size());
  for (std::size_t t = 0; t < v.size(); ++t) out[t] = f.frobenius(v[t], k);
  return out;
}

inline bool is_zero_vec(const Vec& v) {
  for (Code c : v)
    if (c != 0) return false;
  return true;
}

/// Entrywise x -> x^{q^i}.
inline Matrix twist(const Matrix& a, std::uint64_t q, std::int64_t i) {
  const std::int64_t k = static_cast<std::int64_t>(twist_exponent(*a.field(), q)) * i;
  std::vector<Code> e(a.entries());
  for (auto& x : e) x = a.field()->frobenius(x, k);
  return {a.field(), a.rows(), a.cols(), std::move(e)};
}

/// Applies an embedding entrywise.
inline Matrix embed(const Matrix& a, const Embedding& emb) {
  require_same_field(a.field(), emb.source());
  if (emb.source() == emb.target() && emb.generator_image() == emb.source()->generator()) return a;
  std::vector<Code> e(a.entries());
  for (auto& x : e) x = emb(x);
  return {emb.target(), a.rows(), a.cols(), std::move(e)};
}

inline Vec embed(const Vec& v, const Embedding& emb) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = emb(v[i]);
  return out;
}

struct RankKernel {
  std::size_t rank = 0;
  std::vector<Vec> kernel;  // basis of {v : A v = 0}
};

namespace detail {

// Reduced row echelon form in place; pivot = first nonzero entry in the
// current column, scanning rows top-down. Returns the pivot columns.
inline std::vector<std::size_t> rref(Matrix& m) {
  const Field& f = *m.field();
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    std::size_t piv = r;
    while (piv < m.rows() && m(piv, c) == 0) ++piv;
    if (piv == m.rows()) continue;
    if (piv != r)
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(piv, j), m(r, j));
    const Code inv = f.inv(m(r, c));
    for (std::size_t j = 0; j < m.cols(); ++j) m(r, j) = f.mul(m(r, j), inv);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c) == 0) continue;
      const Code factor = m(i, c);
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = f.sub(m(i, j), f.mul(factor, m(r, j)));
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace detail

inline RankKernel rank_kernel(const Matrix& a) {
  Matrix m = a;
  const auto pivots = detail::rref(m);
  const Field& f = *a.field();
  RankKernel out;
  out.rank = pivots.size();
  std::vector<bool> is_pivot(a.cols(), false);
  for (auto c : pivots) is_pivot[c] = true;
  for (std::size_t free = 0; free < a.cols(); ++free) {
    if (is_pivot[free]) continue;
    Vec v(a.cols(), 0);
    v[free] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = f.neg(m(r, free));
    out.kernel.push_back(std::move(v));
  }
  return out;
}

inline std::size_t rank(const Matrix& a) {
  Matrix m = a;
  return detail::rref(m).size();
}

inline Code determinant(const Matrix& a) {
  require(a.square(), ErrorKind::InvalidArgument, "determinant of non-square matrix");
  const Field& f = *a.field();
  Matrix m = a;
  Code det = 1;
  const std::size_t n = m.rows();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && m(piv, c) == 0) ++piv;
    if (piv == n) return 0;
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(piv, j), m(c, j));
      det = f.neg(det);
    }
    det = f.mul(det, m(c, c));
    const Code inv = f.inv(m(c, c));
    for (std::size_t i = c + 1; i < n; ++i) {
      if (m(i, c) == 0) continue;
      const Code factor = f.mul(m(i, c), inv);
      for (std::size_t j = c; j < n; ++j) m(i, j) = f.sub(m(i, j), f.mul(factor, m(c, j)));
    }
  }
  return det;
}

inline bool is_invertible(const Matrix& a) { return a.square() && rank(a) == a.rows(); }

inline Matrix mat_inverse(const Matrix& a) {
  require(a.square(), ErrorKind::InvalidArgument, "inverse of non-square matrix");
  const std::size_t n = a.rows();
  Matrix aug(a.field(), n, 2 * n);
  aug.set_block(0, 0, a);
  for (std::size_t i = 0; i < n; ++i) aug(i, n + i) = 1;
  const auto pivots = detail::rref(aug);
  if (pivots.size() < n || pivots[n - 1] != n - 1) fail(ErrorKind::SingularMatrix, "matrix is not invertible");
  return aug.block(0, n, n, n);
}

/// Some x with A x = b, or nullopt.
inline std::optional<Vec> solve(const Matrix& a, const Vec& b) {
  require(b.size() == a.rows(), ErrorKind::InvalidArgument, "right-hand side dimension mismatch");
  Matrix aug(a.field(), a.rows(), a.cols() + 1);
  aug.set_block(0, 0, a);
  for (std::size_t i = 0; i < a.rows(); ++i) aug(i, a.cols()) = b[i];
  const auto pivots = detail::rref(aug);
  if (!pivots.empty() && pivots.back() == a.cols()) return std::nullopt;
  Vec x(a.cols(), 0);
  for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug(r, a.cols());
  return x;
}

/// tT A T^(q) without the invertibility check.
inline Matrix congruence_unchecked(const Matrix& a, const Matrix& t, std::uint64_t q) {
  return t.transpose() * a * twist(t, q, 1);
}

/// tT A T^(q); T must be invertible.
inline Matrix congruence(const Matrix& a, const Matrix& t, std::uint64_t q) {
  require(a.square() && t.square() && a.rows() == t.rows(), ErrorKind::InvalidArgument,
          "congruence dimension mismatch");
  if (!is_invertible(t)) fail(ErrorKind::SingularMatrix, "congruence by a singular transformation");
  return congruence_unchecked(a, t, q);
}

/// tx A y^(q).
inline Code form_value(const Matrix& a, std::uint64_t q, const Vec& x, const Vec& y) {
  require(a.square() && x.size() == a.rows() && y.size() == a.rows(), ErrorKind::InvalidArgument,
          "form_value dimension mismatch");
  const Field& f = *a.field();
  const Vec ay = mat_vec(a, twist_vec(f, y, q, 1));
  Code acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) acc = f.add(acc, f.mul(x[i], ay[i]));
  return acc;
}

/// Invertible T with column `position` equal to v; the other columns are
/// standard basis vectors in increasing order, skipping the last nonzero
/// coordinate of v.
inline Matrix complete_basis(const FieldPtr& field, const Vec& v, std::size_t position) {
  const std::size_t n = v.size();
  require(position < n, ErrorKind::InvalidArgument, "position out of range");
  std::size_t pivot = n;
  for (std::size_t i = n; i-- > 0;)
    if (v[i] != 0) {
      pivot = i;
      break;
    }
  if (pivot == n) fail(ErrorKind::InvalidArgument, "complete_basis of the zero vector");
  Matrix t(field, n, n);
  std::size_t next = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (c == position) {
      t.set_col(c, v);
      continue;
    }
    if (next == pivot) ++next;
    t(next, c) = 1;
    ++next;
  }
  return t;
}

/// Permutation matrix P with P e_j = e_{perm[j]}.
inline Matrix permutation_matrix(const FieldPtr& field, const std::vector<std::size_t>& perm) {
  Matrix p(field, perm.size(), perm.size());
  for (std::size_t j = 0; j < perm.size(); ++j) p(perm[j], j) = 1;
  return p;
}

/// Basis over F_{q^j} of {v in ambient^{n+1} : v^(q^j) = Q v}.
///
/// The condition is F_p-linear, so it is solved over the prime field on the
/// coordinates of v; an ambient-independent subset of the F_p kernel is
/// then an F_{q^j}-basis by Galois descent.
inline std::vector<Vec> semilinear_fixed_space(const Matrix& q_mat, std::uint64_t q, unsigned j) {
  require(q_mat.square(), ErrorKind::InvalidArgument, "fixed-space matrix must be square");
  require(j >= 1, ErrorKind::InvalidArgument, "sigma exponent must be positive");
  const FieldPtr& amb = q_mat.field();
  const unsigned e = twist_exponent(*amb, q);
  if (amb->degree() % (e * j) != 0)
    fail(ErrorKind::FieldMismatch, amb->name() + " does not contain F_{q^" + std::to_string(j) + "}");
  const std::size_t n = q_mat.rows();
  const unsigned d = amb->degree();
  const std::uint32_t p = amb->characteristic();
  const std::int64_t shift = static_cast<std::int64_t>(e) * j;
  const FieldPtr prime = build_field(p, 1, kMaxSupportedDegree);

  // Column (i, k) is the image of g^k e_i under v -> v^(q^j) - Q v.
  const std::size_t dim = n * d;
  Matrix lin(prime, dim, dim);
  std::vector<Code> basis(d);
  basis[0] = 1;
  for (unsigned k = 1; k < d; ++k) basis[k] = amb->mul(basis[k - 1], amb->generator());
  for (std::size_t i = 0; i < n; ++i)
    for (unsigned k = 0; k < d; ++k) {
      const Code x = basis[k];
      const Code fx = amb->frobenius(x, shift);
      for (std::size_t r = 0; r < n; ++r) {
        Code val = amb->neg(amb->mul(q_mat(r, i), x));
        if (r == i) val = amb->add(val, fx);
        const auto cf = amb->coeffs(val);
        for (unsigned t = 0; t < d; ++t) lin(r * d + t, i * d + k) = cf[t];
      }
    }
  const auto kernel = rank_kernel(lin).kernel;

  std::vector<Vec> chosen;
  Matrix span(amb, 0, n);
  for (const auto& kv : kernel) {
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::uint32_t> cf(d);
      for (unsigned t = 0; t < d; ++t) cf[t] = static_cast<std::uint32_t>(kv[i * d + t]);
      v[i] = amb->from_coeffs(cf);
    }
    Matrix trial(amb, chosen.size() + 1, n);
    for (std::size_t r = 0; r < chosen.size(); ++r)
      for (std::size_t c = 0; c < n; ++c) trial(r, c) = chosen[r][c];
    for (std::size_t c = 0; c < n; ++c) trial(chosen.size(), c) = v[c];
    if (rank(trial) == chosen.size() + 1) chosen.push_back(std::move(v));
    if (chosen.size() == n) break;
  }
  return chosen;
}

}  // namespace twistform

#endif  // TWISTFORM_TWISTED_LINEAR_HPP
