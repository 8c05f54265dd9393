#ifndef TWISTFORM_DEGENERATION_HPP
#define TWISTFORM_DEGENERATION_HPP

// Reduction of corank-one matrices to W_s = diag(I_s, E_{n-s+1}) by the
// explicit block transformations (G-, H- and H'-chains, the P_s parity
// lemma and the B_s recursion), the plane-curve classifier, seeded random
// instances and brute-force orbit oracles.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "twistform/error.hpp"
#include "twistform/fullrank.hpp"
#include "twistform/gf_tower.hpp"
#include "twistform/twisted_linear.hpp"

namespace twistform {

/// E_r: ones directly below the diagonal.
inline Matrix e_matrix(const FieldPtr& f, std::size_t r) {
  Matrix m(f, r, r);
  for (std::size_t i = 0; i + 1 < r; ++i) m(i + 1, i) = 1;
  return m;
}

/// W_s = diag(I_s, E_{n-s+1}) of size n+1.
inline Matrix w_matrix(const FieldPtr& f, std::size_t n, std::size_t s) {
  if (s > n) fail(ErrorKind::InvalidArgument, "s = " + std::to_string(s) + " out of range for n = " + std::to_string(n));
  Matrix m(f, n + 1, n + 1);
  for (std::size_t i = 0; i < s; ++i) m(i, i) = 1;
  for (std::size_t k = s; k < n; ++k) m(k + 1, k) = 1;
  return m;
}

enum class LabelKind { Ws, Identity, PlaneZ0, PlaneZ1, PlaneX0, PlaneX1, PlaneX2 };

struct Label {
  LabelKind kind = LabelKind::Ws;
  int s = -1;  // only for Ws

  friend bool operator==(const Label&, const Label&) = default;
};

inline std::string label_name(LabelKind k) {
  switch (k) {
    case LabelKind::Ws: return "Ws";
    case LabelKind::Identity: return "Identity";
    case LabelKind::PlaneZ0: return "PlaneZ0";
    case LabelKind::PlaneZ1: return "PlaneZ1";
    case LabelKind::PlaneX0: return "PlaneX0";
    case LabelKind::PlaneX1: return "PlaneX1";
    case LabelKind::PlaneX2: return "PlaneX2";
  }
  return "?";
}

inline std::optional<LabelKind> parse_label_kind(const std::string& s) {
  for (auto k : {LabelKind::Ws, LabelKind::Identity, LabelKind::PlaneZ0, LabelKind::PlaneZ1, LabelKind::PlaneX0,
                 LabelKind::PlaneX1, LabelKind::PlaneX2})
    if (label_name(k) == s) return k;
  return std::nullopt;
}

struct StepParams {
  std::map<std::string, std::int64_t> ints;
  std::map<std::string, Vec> vectors;
};

struct Step {
  std::string name;
  StepParams params;
  Matrix matrix;
  Matrix claimed;  // congruence(previous claimed, matrix, q)
};

struct Certificate {
  Matrix input;
  std::uint64_t q = 0;
  Label label;
  Matrix t;
  FieldPtr field;
  std::vector<Step> trace;
  std::optional<std::uint64_t> seed;
  Code input_embedding = 0;  // image of the input field's generator in `field`
};

/// Running reduction: current matrix, accumulated transformation and trace,
/// all over one field reached from the input through a chain of embeddings.
class Reduction {
 public:
  Reduction(const Matrix& start, std::uint64_t q, unsigned max_degree = kDefaultMaxDegree)
      : input_(start), q_(q), max_degree_(max_degree), cur_(start),
        t_(Matrix::identity(start.field(), start.rows())), emb_(Embedding::identity(start.field())) {
    require(start.square(), ErrorKind::InvalidArgument, "form matrix must be square");
    twist_exponent(*start.field(), q);
  }

  const Matrix& current() const noexcept { return cur_; }
  const Matrix& t() const noexcept { return t_; }
  const FieldPtr& field() const noexcept { return cur_.field(); }
  const Embedding& embedding() const noexcept { return emb_; }
  const std::vector<Step>& trace() const noexcept { return trace_; }
  const Matrix& input() const noexcept { return input_; }
  std::uint64_t q() const noexcept { return q_; }
  unsigned max_degree() const noexcept { return max_degree_; }
  std::size_t n() const noexcept { return cur_.rows() - 1; }

  void apply(std::string name, StepParams params, const Matrix& s) {
    Matrix claimed = congruence(cur_, s, q_);
    t_ = t_ * s;
    cur_ = claimed;
    trace_.push_back({std::move(name), std::move(params), s, std::move(claimed)});
  }

  /// Moves every live object along `e` (whose source is the current field).
  void migrate(const Embedding& e) {
    if (e.source() == e.target()) return;
    cur_ = embed(cur_, e);
    t_ = embed(t_, e);
    for (auto& st : trace_) {
      st.matrix = embed(st.matrix, e);
      st.claimed = embed(st.claimed, e);
      for (auto& [k, v] : st.params.vectors) v = embed(v, e);
    }
    emb_ = emb_.then(e);
  }

  Certificate certificate(Label label) const {
    Certificate c;
    c.input = input_;
    c.q = q_;
    c.label = label;
    c.t = t_;
    c.field = field();
    c.trace = trace_;
    c.input_embedding = emb_.generator_image();
    return c;
  }

 private:
  Matrix input_;
  std::uint64_t q_;
  unsigned max_degree_;
  Matrix cur_;
  Matrix t_;
  Embedding emb_;
  std::vector<Step> trace_;
};

// ---------------------------------------------------------------------------
// Structural shape matching.

/// Frame(m): rows/cols < m hold an arbitrary block D, column m above the
/// block holds h, row m left of the block holds g, the region i, j >= m is
/// the chain (k+1, k) = 1 for k >= m plus `extras`, and every other entry is
/// zero.
struct FrameParts {
  Matrix d;
  Vec g;  // row m, columns < m
  Vec h;  // column m, rows < m
};

inline std::optional<FrameParts> match_frame(const Matrix& a, std::size_t m,
                                             const std::vector<std::pair<std::size_t, std::size_t>>& extras = {}) {
  const std::size_t size = a.rows();
  if (!a.square() || m >= size) return std::nullopt;
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j) {
      if (i < m && j < m) continue;
      if ((i == m && j < m) || (j == m && i < m)) continue;
      Code want = 0;
      if (i >= m && j >= m) {
        if (i == j + 1) want = 1;
        for (auto [ei, ej] : extras)
          if (ei == i && ej == j) want = 1;
      }
      if (a(i, j) != want) return std::nullopt;
    }
  FrameParts out{a.block(0, 0, m, m), Vec(m), Vec(m)};
  for (std::size_t j = 0; j < m; ++j) out.g[j] = a(m, j);
  for (std::size_t i = 0; i < m; ++i) out.h[i] = a(i, m);
  return out;
}

inline std::string shape_dump(const Matrix& a) {
  std::string s;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    s += "\n  [";
    for (std::size_t j = 0; j < a.cols(); ++j) s += (j ? " " : "") + std::to_string(a(i, j));
    s += "]";
  }
  return s;
}

[[noreturn]] inline void shape_error(const std::string& what, const Matrix& a) {
  fail(ErrorKind::ShapeMismatch, "expected " + what + ", got:" + shape_dump(a));
}

/// B_s: (D, b) with B = diag(D, E_{n-s+1}) plus b in row s.
inline std::optional<FrameParts> match_b(const Matrix& a, std::size_t s) {
  auto f = match_frame(a, s);
  if (!f || !is_zero_vec(f->h)) return std::nullopt;
  return f;
}

/// G_{s,r}: W_s plus the row vector a at row s + r, columns < s.
inline std::optional<Vec> match_g(const Matrix& a, std::size_t s, std::size_t r) {
  const std::size_t n = a.rows() - 1;
  if (s < 1 || s + r > n) return std::nullopt;
  Matrix w = w_matrix(a.field(), n, s);
  Vec vec(s);
  for (std::size_t j = 0; j < s; ++j) {
    vec[j] = a(s + r, j);
    w(s + r, j) = vec[j];
  }
  if (!(w == a)) return std::nullopt;
  return vec;
}

// ---------------------------------------------------------------------------
// Transformations.

namespace detail {

inline Matrix swap_matrix(const FieldPtr& f, std::size_t size, std::size_t i, std::size_t j) {
  std::vector<std::size_t> perm(size);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::swap(perm[i], perm[j]);
  return permutation_matrix(f, perm);
}

inline void expect_frame(const Reduction& red, std::size_t m, const std::vector<std::pair<std::size_t, std::size_t>>& extras,
                         bool h_zero, const std::string& what) {
  auto fr = match_frame(red.current(), m, extras);
  if (!fr || (h_zero && !is_zero_vec(fr->h))) shape_error(what, red.current());
}

// G-chain from G_{s,r}; ends at W_s.
inline void run_g_chain(Reduction& red, std::size_t s, std::size_t r) {
  const std::size_t n = red.n();
  const FieldPtr& f = red.field();
  while (true) {
    auto a = match_g(red.current(), s, r);
    if (!a) shape_error("G_{" + std::to_string(s) + "," + std::to_string(r) + "}", red.current());
    if (is_zero_vec(*a)) return;
    if (s + r + 1 > n) fail(ErrorKind::ShapeMismatch, "G-chain parity dead-end at r = " + std::to_string(r));
    Matrix tg = Matrix::identity(f, n + 1);
    const Vec aq = twist_vec(*f, *a, red.q(), 1);
    for (std::size_t i = 0; i < s; ++i) {
      tg(i, s + r) = f->neg((*a)[i]);
      tg(s + r + 1, i) = aq[i];
    }
    red.apply("T_G", {{{"s", s}, {"r", r}}, {{"a", *a}}}, tg);
    r += 2;
    if (s + r > n) {
      if (!(red.current() == w_matrix(f, n, s))) shape_error("W_" + std::to_string(s), red.current());
      return;
    }
  }
}

// H-chain from H_{s,r} until the extra diagonal entry sits at n-1.
inline void run_h_chain(Reduction& red, std::size_t s, std::size_t r) {
  const std::size_t n = red.n();
  const FieldPtr& f = red.field();
  expect_frame(red, s - 1, {{s + r - 1, s + r - 1}}, false, "H_{" + std::to_string(s) + "," + std::to_string(r) + "}");
  while (r < n - s) {
    if (r + 1 == n - s) fail(ErrorKind::ShapeMismatch, "H-chain parity dead-end at r = " + std::to_string(r));
    const std::size_t k = s + r - 1;
    Matrix th = Matrix::identity(f, n + 1);
    th(k + 1, k) = f->neg(1);
    th(k + 1, k + 2) = 1;
    red.apply("T_H", {{{"s", s}, {"r", r}}, {}}, th);
    r += 2;
    expect_frame(red, s - 1, {{s + r - 1, s + r - 1}}, false, "H_{" + std::to_string(s) + "," + std::to_string(r) + "}");
  }
}

// H'-chain: moves the extra entry (k, k+1) two places down until k = n-2.
inline void run_h_prime_chain(Reduction& red, std::size_t s, std::size_t k, bool first_is_t7) {
  const std::size_t n = red.n();
  const FieldPtr& f = red.field();
  expect_frame(red, s - 1, {{k, k + 1}}, true, "H'-shape with extra entry at " + std::to_string(k));
  while (k < n - 2) {
    if (k + 3 > n) fail(ErrorKind::ShapeMismatch, "H'-chain parity dead-end at k = " + std::to_string(k));
    Matrix th = Matrix::identity(f, n + 1);
    th(k + 1, k + 3) = 1;
    th(k + 2, k) = f->neg(1);
    red.apply(first_is_t7 ? "T_7" : "T_{H'}", {{{"s", s}, {"k", k}}, {}}, th);
    first_is_t7 = false;
    k += 2;
    expect_frame(red, s - 1, {{k, k + 1}}, true, "H'-shape with extra entry at " + std::to_string(k));
  }
}

// P_s (= G_{s,0}, a != 0) to W_s or B_{s-1}. Returns the resulting s when
// W_s (or W_0) is reached, nullopt for B_{s-1}.
inline std::optional<std::size_t> run_lemma4(Reduction& red, std::size_t s) {
  const std::size_t n = red.n();
  auto a0 = match_g(red.current(), s, 0);
  if (!a0) shape_error("P_" + std::to_string(s), red.current());
  if (is_zero_vec(*a0)) return s;
  if ((n - s + 1) % 2 == 0) {
    run_g_chain(red, s, 0);
    return s;
  }
  FieldPtr f = red.field();
  const std::uint64_t q = red.q();

  std::size_t hi = s;
  for (std::size_t i = s; i-- > 0;)
    if ((*a0)[i] != 0) {
      hi = i;
      break;
    }
  if (hi != s - 1) red.apply("permute", {{{"i", hi}, {"j", s - 1}}, {}}, swap_matrix(f, n + 1, hi, s - 1));

  {
    Vec c(n + 1, 1);
    c[s] = f->inv(red.current()(s, s - 1));
    for (std::size_t j = s; j < n; ++j) c[j + 1] = f->inv(f->pow(c[j], q));
    Matrix sc = Matrix::diagonal(f, c);
    if (!sc.is_identity()) red.apply("scale", {{{"s", s}}, {}}, sc);
  }
  auto a1 = match_g(red.current(), s, 0);
  if (!a1 || (*a1)[s - 1] != 1) shape_error("P'_" + std::to_string(s), red.current());
  const Vec ap(a1->begin(), a1->end() - 1);
  const Vec app = twist_vec(*f, ap, q, -1);

  Matrix t1 = Matrix::identity(f, n + 1);
  for (std::size_t j = 0; j + 1 < s; ++j) t1(s - 1, j) = f->neg(app[j]);
  red.apply("T_1", {{{"s", s}}, {{"a'", ap}, {"a''", app}}}, t1);
  expect_frame(red, s - 1, {{s - 1, s - 1}}, false, "Q_" + std::to_string(s));

  if (s == n) {
    Matrix t2 = Matrix::identity(f, n + 1);
    for (std::size_t j = 0; j + 1 < s; ++j) t2(n, j) = app[j];
    t2(n, n - 1) = f->neg(1);
    red.apply("T_2", {{{"s", s}}, {}}, t2);
    if (!match_b(red.current(), s - 1)) shape_error("B_" + std::to_string(s - 1), red.current());
    return s == 1 ? std::optional<std::size_t>(0) : std::nullopt;
  }

  Matrix t3 = Matrix::identity(f, n + 1);
  t3(s, s - 1) = f->neg(1);
  t3(s, s + 1) = 1;
  red.apply("T_3", {{{"s", s}}, {}}, t3);
  run_h_chain(red, s, 2);

  Matrix t4 = Matrix::identity(f, n + 1);
  t4(n, n - 1) = f->neg(1);
  red.apply("T_4", {{{"s", s}}, {}}, t4);
  expect_frame(red, s - 1, {}, false, "R_" + std::to_string(s));
  if (s == 1) {
    if (!(red.current() == w_matrix(f, n, 0))) shape_error("W_0", red.current());
    return 0;
  }

  Matrix t5 = Matrix::identity(f, n + 1);
  t5(s - 1, s + 1) = 1;
  for (std::size_t j = 0; j + 1 < s; ++j) t5(s, j) = app[j];
  red.apply("T_5", {{{"s", s}}, {{"a''", app}}}, t5);
  run_h_prime_chain(red, s, s, true);

  Matrix t6 = Matrix::identity(f, n + 1);
  t6(n, n - 2) = f->neg(1);
  red.apply("T_6", {{{"s", s}}, {}}, t6);
  if (!match_b(red.current(), s - 1)) shape_error("B_" + std::to_string(s - 1), red.current());
  return std::nullopt;
}

// B_s to W_s (returns s) or B_{s-1} (returns nullopt).
inline std::optional<std::size_t> run_lemma5(Reduction& red, std::size_t s) {
  const std::size_t n = red.n();
  auto parts = match_b(red.current(), s);
  if (!parts) shape_error("B_" + std::to_string(s), red.current());
  if (s == 0) return 0;
  const std::uint64_t q = red.q();
  if (determinant(parts->d) != 0) {
    if (!parts->d.is_identity()) {
      auto w = normalize_full_rank(parts->d, q, red.max_degree());
      red.migrate(w.embedding);
      Matrix blk = Matrix::identity(red.field(), n + 1);
      blk.set_block(0, 0, w.t);
      red.apply("fullrank-on-block", {{{"s", s}}, {}}, blk);
    }
    auto b = match_b(red.current(), s);
    if (!b || !b->d.is_identity()) shape_error("P_" + std::to_string(s), red.current());
    if (is_zero_vec(b->g)) return s;
    return run_lemma4(red, s);
  }

  FieldPtr f = red.field();
  const std::size_t full = rank(parts->d);
  std::size_t dep = s;
  for (std::size_t i = s; i-- > 0;) {
    Matrix others(f, s - 1, s);
    for (std::size_t r = 0, o = 0; r < s; ++r) {
      if (r == i) continue;
      for (std::size_t c = 0; c < s; ++c) others(o, c) = parts->d(r, c);
      ++o;
    }
    if (rank(others) == full) {
      dep = i;
      break;
    }
  }
  if (dep == s) fail(ErrorKind::Internal, "singular block without a dependent row");
  if (dep != s - 1) red.apply("permute", {{{"i", dep}, {"j", s - 1}}, {}}, swap_matrix(f, n + 1, dep, s - 1));

  const Matrix& cur = red.current();
  Vec w(s - 1, 0);
  if (s > 1) {
    Matrix sys(f, s, s - 1);  // columns are rows 0..s-2 of D
    Vec rhs(s);
    for (std::size_t c = 0; c < s; ++c) {
      for (std::size_t r = 0; r + 1 < s; ++r) sys(c, r) = cur(r, c);
      rhs[c] = cur(s - 1, c);
    }
    auto sol = solve(sys, rhs);
    if (!sol) fail(ErrorKind::Internal, "dependent row is not a combination of the others");
    w = *sol;
  }
  Matrix tp = Matrix::identity(f, n + 1);
  for (std::size_t i = 0; i + 1 < s; ++i) tp(i, s - 1) = f->neg(w[i]);
  red.apply("T'", {{{"s", s}}, {{"w", w}}}, tp);

  Matrix qm(f, s, s);
  for (std::size_t r = 0; r < s; ++r) {
    const std::size_t src = r + 1 < s ? r : s;
    for (std::size_t c = 0; c < s; ++c) qm(r, c) = red.current()(src, c);
  }
  if (determinant(qm) == 0) fail(ErrorKind::RankMismatch, "det Q = 0: input does not have rank n");
  Matrix qp = twist(mat_inverse(qm), q, -1);
  Matrix tpp = Matrix::identity(f, n + 1);
  tpp.set_block(0, 0, qp);
  red.apply("T''", {{{"s", s}}, {}}, tpp);
  if (!match_b(red.current(), s - 1)) shape_error("B_" + std::to_string(s - 1), red.current());
  return std::nullopt;
}

inline void run_kernel_move(Reduction& red, const Vec& shear = {}) {
  const Matrix& a = red.current();
  const std::size_t n = red.n();
  auto rk = rank_kernel(a);
  if (rk.rank != n)
    fail(ErrorKind::RankMismatch, "expected rank " + std::to_string(n) + ", got " + std::to_string(rk.rank));
  const Vec& w = rk.kernel.front();
  const Vec v = twist_vec(*a.field(), w, red.q(), -1);
  Matrix t0 = complete_basis(a.field(), v, n);
  StepParams params{{}, {{"w", w}}};
  if (!shear.empty()) {
    Matrix sh = Matrix::identity(a.field(), n + 1);
    for (std::size_t j = 0; j < n; ++j) sh(n, j) = shear[j];
    t0 = t0 * sh;
    params.vectors["shear"] = shear;
  }
  if (!t0.is_identity()) red.apply("kernel-move", std::move(params), t0);
  for (std::size_t i = 0; i <= n; ++i)
    if (red.current()(i, n) != 0) fail(ErrorKind::Internal, "kernel move left a nonzero last column");
}

}  // namespace detail

struct LemmaResult {
  Matrix result;
  std::vector<Step> steps;
  Matrix t;
  Embedding embedding;  // input field -> field of result
};

inline LemmaResult lemma_result(const Reduction& red) {
  return {red.current(), red.trace(), red.t(), red.embedding()};
}

inline std::pair<Matrix, Matrix> move_kernel_to_last(const Matrix& a, std::uint64_t q) {
  Reduction red(a, q);
  detail::run_kernel_move(red);
  return {red.current(), red.t()};
}

inline LemmaResult lemma_G_chain(const Matrix& b, std::uint64_t q, std::size_t s, std::size_t r) {
  Reduction red(b, q);
  if (!match_g(b, s, r)) shape_error("G_{" + std::to_string(s) + "," + std::to_string(r) + "}", b);
  if (s + r + 1 <= b.rows() - 1 || !is_zero_vec(*match_g(b, s, r))) detail::run_g_chain(red, s, r);
  return lemma_result(red);
}

inline LemmaResult lemma4_reduce(const Matrix& p, std::uint64_t q, std::size_t s) {
  Reduction red(p, q);
  detail::run_lemma4(red, s);
  return lemma_result(red);
}

inline LemmaResult lemma_H_chain(const Matrix& b, std::uint64_t q, std::size_t s, std::size_t r) {
  require(s >= 1 && r >= 2, ErrorKind::InvalidArgument, "H-chain needs s >= 1, r >= 2");
  Reduction red(b, q);
  detail::run_h_chain(red, s, r);
  return lemma_result(red);
}

/// Starts from the H'-shape whose extra entry sits at (k, k+1).
inline LemmaResult lemma_H_prime_chain(const Matrix& b, std::uint64_t q, std::size_t s, std::size_t k) {
  require(s >= 1, ErrorKind::InvalidArgument, "H'-chain needs s >= 1");
  Reduction red(b, q);
  detail::run_h_prime_chain(red, s, k, false);
  return lemma_result(red);
}

struct Lemma5Outcome {
  LemmaResult result;
  std::optional<std::size_t> w_s;  // set when a normal form W_s was reached
};

inline Lemma5Outcome lemma5_step(const Matrix& b, std::uint64_t q, std::size_t s,
                                 unsigned max_degree = kDefaultMaxDegree) {
  Reduction red(b, q, max_degree);
  auto r = detail::run_lemma5(red, s);
  return {lemma_result(red), r};
}

inline constexpr unsigned kDefaultShearAttempts = 400;

namespace detail {

inline Certificate corank_one_attempt(const Matrix& a, std::uint64_t q, unsigned max_degree, const Vec& shear) {
  Reduction red(a, q, max_degree);
  run_kernel_move(red, shear);
  std::size_t s = red.n();
  while (true) {
    auto r = run_lemma5(red, s);
    if (r) {
      s = *r;
      break;
    }
    --s;
  }
  if (!(red.current() == w_matrix(red.field(), red.n(), s)))
    fail(ErrorKind::Internal, "reduction did not end at W_" + std::to_string(s));
  return red.certificate({LabelKind::Ws, static_cast<int>(s)});
}

}  // namespace detail

/// Rank-n input: certificate with congruence(embed(A), T, q) = W_s.
///
/// The first attempt follows the block lemmas verbatim. An invertible block
/// D_s may need a Lang extension beyond `max_degree`; in that case the
/// kernel move is repeated with a seeded shear x_n -> x_n + sum c_j x_j,
/// which changes D_n by a rank-one term and hence the whole path.
inline Certificate classify_corank_one(const Matrix& a, std::uint64_t q, unsigned max_degree = kDefaultMaxDegree,
                                       unsigned attempts = kDefaultShearAttempts) {
  require(a.square() && a.rows() >= 2, ErrorKind::InvalidArgument, "need a square matrix of size at least 2");
  const std::size_t n = a.rows() - 1;
  std::mt19937_64 rng(0x7368656172ULL);
  std::optional<Error> last;
  for (unsigned k = 0; k < std::max(attempts, 1u); ++k) {
    Vec shear;
    if (k > 0) {
      shear.resize(n);
      for (auto& c : shear) c = rng() % a.field()->order();
    }
    try {
      return detail::corank_one_attempt(a, q, max_degree, shear);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ExtensionCap) throw;
      last = e;
    }
  }
  throw *last;
}

/// Full-rank input: certificate with congruence(embed(A), T, q) = I.
inline Certificate classify_full_rank(const Matrix& a, std::uint64_t q, unsigned max_degree = kDefaultMaxDegree) {
  auto w = normalize_full_rank(a, q, max_degree);
  Reduction red(a, q, max_degree);
  red.migrate(w.embedding);
  red.apply("hermitize", {}, w.t1);
  red.apply("diagonalize", {}, w.t2);
  red.apply("scale", {}, w.t3);
  return red.certificate({LabelKind::Identity, -1});
}

inline Matrix plane_z0(const FieldPtr& f) {
  Matrix m(f, 3, 3);
  m(0, 0) = 1;
  return m;
}

inline Matrix plane_z1(const FieldPtr& f) {
  Matrix m(f, 3, 3);
  m(1, 0) = 1;
  return m;
}

/// Normal-form matrix of a label for forms of size n+1.
inline Matrix normal_form(const FieldPtr& f, const Label& label, std::size_t n) {
  switch (label.kind) {
    case LabelKind::Ws: return w_matrix(f, n, static_cast<std::size_t>(label.s));
    case LabelKind::Identity: return Matrix::identity(f, n + 1);
    case LabelKind::PlaneZ0: return plane_z0(f);
    case LabelKind::PlaneZ1: return plane_z1(f);
    case LabelKind::PlaneX0: return w_matrix(f, 2, 0);
    case LabelKind::PlaneX1: return w_matrix(f, 2, 1);
    case LabelKind::PlaneX2: return w_matrix(f, 2, 2);
  }
  fail(ErrorKind::Internal, "unknown label");
}

/// Plane curves of rank 1 or 2.
///
/// Rank 1: A = u tv, so the form is (u.x)(m.x)^q with m = v^(1/q). The
/// curve is Z_0 when u and m are proportional, Z_1 otherwise.
inline Certificate classify_plane(const Matrix& a, std::uint64_t q, unsigned max_degree = kDefaultMaxDegree) {
  require(a.square() && a.rows() == 3, ErrorKind::InvalidArgument, "plane classification needs a 3x3 matrix");
  const std::size_t rk = rank(a);
  if (rk == 2) {
    Certificate c = classify_corank_one(a, q, max_degree);
    c.label = {c.label.s == 0 ? LabelKind::PlaneX0 : c.label.s == 1 ? LabelKind::PlaneX1 : LabelKind::PlaneX2, -1};
    return c;
  }
  if (rk != 1) fail(ErrorKind::RankMismatch, "plane classification needs rank 1 or 2, got " + std::to_string(rk));

  const FieldPtr& f = a.field();
  std::size_t j0 = 0;
  while (is_zero_vec(a.col(j0))) ++j0;
  const Vec u = a.col(j0);
  std::size_t i0 = 0;
  while (u[i0] == 0) ++i0;
  Vec v(3);
  const Code ui = f->inv(u[i0]);
  for (std::size_t j = 0; j < 3; ++j) v[j] = f->mul(a(i0, j), ui);
  const Vec m = twist_vec(*f, v, q, -1);

  Matrix um(f, 3, 2);
  um.set_col(0, m);
  um.set_col(1, u);
  Reduction red(a, q, max_degree);
  StepParams params{{}, {{"u", u}, {"m", m}}};
  if (rank(um) == 1) {
    std::size_t k = 0;
    while (m[k] == 0) ++k;
    const Code c = f->div(u[k], m[k]);
    auto root = kth_root(FieldElem(f, f->inv(c)), q + 1, max_degree);
    red.migrate(root.embedding);
    const FieldPtr& g = red.field();
    Matrix cm = complete_basis(g, embed(m, root.embedding), 0);
    Matrix t = mat_inverse(cm).scaled(root.root.code()).transpose();
    red.apply("plane-rank1", std::move(params), t);
    if (!(red.current() == plane_z0(g))) fail(ErrorKind::Internal, "rank-one reduction did not reach Z_0");
    return red.certificate({LabelKind::PlaneZ0, -1});
  }
  Matrix cm(f, 3, 3);
  cm.set_col(0, m);
  cm.set_col(1, u);
  for (std::size_t k = 0; k < 3; ++k) {
    Vec e(3, 0);
    e[k] = 1;
    cm.set_col(2, e);
    if (determinant(cm) != 0) break;
  }
  red.apply("plane-rank1", std::move(params), mat_inverse(cm).transpose());
  if (!(red.current() == plane_z1(f))) fail(ErrorKind::Internal, "rank-one reduction did not reach Z_1");
  return red.certificate({LabelKind::PlaneZ1, -1});
}

/// Dispatch by rank: full rank to Identity, rank n to W_s, rank 1 plane
/// curves to Z_0/Z_1.
inline Certificate classify(const Matrix& a, std::uint64_t q, unsigned max_degree = kDefaultMaxDegree) {
  require(a.square() && a.rows() >= 2, ErrorKind::InvalidArgument, "need a square matrix of size at least 2");
  const std::size_t n = a.rows() - 1;
  const std::size_t rk = rank(a);
  if (rk == n + 1) return classify_full_rank(a, q, max_degree);
  if (rk == n) return classify_corank_one(a, q, max_degree);
  if (n == 2 && rk == 1) return classify_plane(a, q, max_degree);
  fail(ErrorKind::RankMismatch, "unsupported rank " + std::to_string(rk) + " for size " + std::to_string(n + 1));
}

// ---------------------------------------------------------------------------
// Random instances.

inline Matrix random_matrix(const FieldPtr& f, std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  Matrix m(f, rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng() % f->order();
  return m;
}

inline Matrix random_invertible(const FieldPtr& f, std::size_t n, std::mt19937_64& rng) {
  while (true) {
    Matrix m = random_matrix(f, n, n, rng);
    if (determinant(m) != 0) return m;
  }
}

/// tU diag(I_r, 0) V with U, V uniformly random invertible.
inline Matrix random_rank_matrix(const FieldPtr& f, std::size_t size, std::size_t r, std::mt19937_64& rng) {
  if (r > size) fail(ErrorKind::InvalidArgument, "rank " + std::to_string(r) + " impossible for size " + std::to_string(size));
  Matrix u = random_invertible(f, size, rng);
  Matrix v = random_invertible(f, size, rng);
  Matrix mid(f, size, size);
  for (std::size_t i = 0; i < r; ++i) mid(i, i) = 1;
  return u.transpose() * mid * v;
}

// ---------------------------------------------------------------------------
// Brute-force orbit oracle.

inline std::vector<Matrix> enumerate_gl(const FieldPtr& f, std::size_t n, std::uint64_t budget) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n * n; ++i) {
    total *= f->order();
    if (total > budget) fail(ErrorKind::Budget, "matrix space too large to enumerate");
  }
  std::vector<Matrix> out;
  std::vector<Code> e(n * n, 0);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::uint64_t x = idx;
    for (std::size_t k = n * n; k-- > 0;) {
      e[k] = x % f->order();
      x /= f->order();
    }
    Matrix m(f, n, n, e);
    if (determinant(m) != 0) out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<Matrix> enumerate_rank(const FieldPtr& f, std::size_t n, std::size_t r, std::uint64_t budget) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n * n; ++i) {
    total *= f->order();
    if (total > budget) fail(ErrorKind::Budget, "matrix space too large to enumerate");
  }
  std::vector<Matrix> out;
  std::vector<Code> e(n * n, 0);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::uint64_t x = idx;
    for (std::size_t k = n * n; k-- > 0;) {
      e[k] = x % f->order();
      x /= f->order();
    }
    Matrix m(f, n, n, e);
    if (rank(m) == r) out.push_back(std::move(m));
  }
  return out;
}

struct OrbitLevel {
  unsigned degree = 0;          // field F_{p^degree}
  std::size_t group_order = 0;  // |GL_{n+1}| at this level
  std::vector<std::size_t> w_orbit_sizes;
  bool separated = false;  // no W_s' lies in the orbit of W_s for s != s'
};

struct OrbitEntry {
  Matrix a;
  std::optional<int> orbit_s;      // W_s whose orbit contains A
  unsigned found_at_degree = 0;    // first ladder degree where that happened
  std::optional<int> pipeline_s;   // classify_corank_one label (rank n only)
  std::size_t base_class = 0;      // index of the orbit over the base field
};

struct OrbitReport {
  std::size_t n = 0;
  std::uint64_t q = 0;
  unsigned m = 0;
  std::size_t rank = 0;
  std::vector<OrbitLevel> levels;
  std::vector<OrbitEntry> entries;
  std::size_t base_classes = 0;
  bool separated = true;
  bool labels_agree = true;    // over the entries whose orbit was found
  std::size_t unresolved = 0;  // entries outside every W_s orbit on the ladder
};

inline constexpr std::uint64_t kOrbitGroupBudget = 300000;

/// Exhaustive orbit computation for (n+1) <= 3 and q^m <= 4. Matrices of
/// the requested rank over F_{q^m} are matched against the orbits of every
/// W_s under GL_{n+1} over F_{q^m}, F_{q^{2m}}, ... while the group fits the
/// enumeration budget.
inline OrbitReport brute_force_orbits(std::size_t n, std::uint64_t q, unsigned m, std::size_t target_rank) {
  require(n >= 1, ErrorKind::InvalidArgument, "n must be at least 1");
  if (n + 1 > 3) fail(ErrorKind::Budget, "orbit enumeration needs n + 1 <= 3");
  std::uint64_t qm = 1;
  for (unsigned i = 0; i < m; ++i) qm *= q;
  if (m == 0 || qm > 4) fail(ErrorKind::Budget, "orbit enumeration needs q^m <= 4");
  std::uint32_t p = 2;
  while (q % p != 0) ++p;
  const FieldPtr probe = build_field(p, 1);
  const unsigned e = twist_exponent(*probe, q);
  const FieldPtr base = build_field(p, e * m);
  const std::size_t size = n + 1;

  OrbitReport rep;
  rep.n = n;
  rep.q = q;
  rep.m = m;
  rep.rank = target_rank;
  const auto mats = enumerate_rank(base, size, target_rank, 1u << 20);
  for (const auto& a : mats) {
    OrbitEntry ent{a, std::nullopt, 0, std::nullopt, 0};
    if (target_rank == n) ent.pipeline_s = classify_corank_one(a, q).label.s;
    rep.entries.push_back(std::move(ent));
  }

  // Base-field orbit partition.
  {
    const auto group = enumerate_gl(base, size, kOrbitGroupBudget * 16);
    std::map<std::vector<Code>, std::size_t> index;
    for (std::size_t i = 0; i < mats.size(); ++i) index[mats[i].entries()] = i;
    std::vector<bool> seen(mats.size(), false);
    std::size_t cls = 0;
    for (std::size_t i = 0; i < mats.size(); ++i) {
      if (seen[i]) continue;
      for (const auto& t : group) {
        auto it = index.find(congruence_unchecked(mats[i], t, q).entries());
        if (it != index.end() && !seen[it->second]) {
          seen[it->second] = true;
          rep.entries[it->second].base_class = cls;
        }
      }
      ++cls;
    }
    rep.base_classes = cls;
  }

  for (unsigned mult = 1;; ++mult) {
    const unsigned deg = base->degree() * mult;
    std::uint64_t fo = 1;
    for (unsigned i = 0; i < deg; ++i) fo *= p;
    // |GL_size(F)| = prod (fo^size - fo^i); stop once it leaves the budget.
    long double order = 1;
    for (std::size_t i = 0; i < size; ++i) {
      long double fs = 1, fi = 1;
      for (std::size_t k = 0; k < size; ++k) fs *= static_cast<long double>(fo);
      for (std::size_t k = 0; k < i; ++k) fi *= static_cast<long double>(fo);
      order *= fs - fi;
    }
    if (order > static_cast<long double>(kOrbitGroupBudget)) break;
    const FieldPtr f = mult == 1 ? base : build_field(p, deg);
    const Embedding emb = Embedding::canonical(base, f);
    const auto group = enumerate_gl(f, size, kOrbitGroupBudget * 64);
    OrbitLevel lvl;
    lvl.degree = deg;
    lvl.group_order = group.size();
    std::vector<std::set<std::vector<Code>>> orbits(n + 1);
    for (std::size_t s = 0; s <= n; ++s) {
      const Matrix w = w_matrix(f, n, s);
      for (const auto& t : group) orbits[s].insert(congruence_unchecked(w, t, q).entries());
      lvl.w_orbit_sizes.push_back(orbits[s].size());
    }
    lvl.separated = true;
    for (std::size_t s = 0; s <= n; ++s)
      for (std::size_t s2 = 0; s2 <= n; ++s2)
        if (s != s2 && orbits[s].count(w_matrix(f, n, s2).entries())) lvl.separated = false;
    rep.separated = rep.separated && lvl.separated;
    for (auto& ent : rep.entries) {
      if (ent.orbit_s) continue;
      const auto key = embed(ent.a, emb).entries();
      for (std::size_t s = 0; s <= n; ++s)
        if (orbits[s].count(key)) {
          ent.orbit_s = static_cast<int>(s);
          ent.found_at_degree = deg;
          break;
        }
    }
    rep.levels.push_back(std::move(lvl));
  }
  for (const auto& ent : rep.entries) {
    if (!ent.orbit_s) {
      ++rep.unresolved;
      continue;
    }
    if (ent.pipeline_s && ent.orbit_s != ent.pipeline_s) rep.labels_agree = false;
  }
  return rep;
}

}  // namespace twistform

#endif  // TWISTFORM_DEGENERATION_HPP
