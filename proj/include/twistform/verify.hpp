#ifndef TWISTFORM_VERIFY_HPP
#define TWISTFORM_VERIFY_HPP

// Certificate replay. Uses only field arithmetic and the twisted linear
// algebra primitives; the normal forms are rebuilt here from their
// definitions rather than taken from the solver.

#include <cstdint>
#include <optional>
#include <string>

#include "twistform/degeneration.hpp"
#include "twistform/error.hpp"
#include "twistform/gf_tower.hpp"
#include "twistform/twisted_linear.hpp"

namespace twistform {

struct VerifyResult {
  bool ok = false;
  // Index of the first failing trace step; trace.size() means the final
  // checks (product of steps, normal form) failed.
  std::optional<std::size_t> failed_step;
  std::string reason;
};

namespace verify_detail {

inline Matrix expected_form(const FieldPtr& f, const Label& l, std::size_t size) {
  Matrix m(f, size, size);
  const std::size_t n = size - 1;
  auto w = [&](std::size_t s) {
    for (std::size_t i = 0; i < s; ++i) m(i, i) = 1;
    for (std::size_t k = s; k < n; ++k) m(k + 1, k) = 1;
  };
  const bool plane = l.kind != LabelKind::Ws && l.kind != LabelKind::Identity;
  if (plane && size != 3) fail(ErrorKind::Malformed, "plane label on a matrix of size " + std::to_string(size));
  switch (l.kind) {
    case LabelKind::Ws:
      if (l.s < 0 || static_cast<std::size_t>(l.s) > n) fail(ErrorKind::Malformed, "label s out of range");
      w(static_cast<std::size_t>(l.s));
      break;
    case LabelKind::Identity:
      for (std::size_t i = 0; i < size; ++i) m(i, i) = 1;
      break;
    case LabelKind::PlaneZ0: m(0, 0) = 1; break;
    case LabelKind::PlaneZ1: m(1, 0) = 1; break;
    case LabelKind::PlaneX0: w(0); break;
    case LabelKind::PlaneX1: w(1); break;
    case LabelKind::PlaneX2: w(2); break;
  }
  return m;
}

}  // namespace verify_detail

/// Replays a certificate: the embedding of the input field, every step's
/// claimed congruence, T as the product of the step matrices, and the final
/// matrix against the label's normal form (delta = 1).
inline VerifyResult verify_certificate(const Certificate& c) {
  VerifyResult res;
  const std::size_t steps = c.trace.size();
  auto bad = [&](std::size_t i, std::string why) {
    res.failed_step = i;
    res.reason = std::move(why);
    return res;
  };
  if (!c.input.square() || c.input.rows() < 2) fail(ErrorKind::Malformed, "input must be square of size at least 2");
  twist_exponent(*c.input.field(), c.q);
  const FieldPtr& f = c.field;
  const std::size_t size = c.input.rows();
  const Embedding emb = Embedding::from_image(c.input.field(), f, c.input_embedding);

  Matrix cur = embed(c.input, emb);
  Matrix prod = Matrix::identity(f, size);
  for (std::size_t i = 0; i < steps; ++i) {
    const Step& st = c.trace[i];
    if (st.matrix.rows() != size || !st.matrix.square() || st.claimed.rows() != size || !st.claimed.square())
      return bad(i, "step " + std::to_string(i) + " (" + st.name + ") has the wrong size");
    if (!is_invertible(st.matrix)) return bad(i, "step " + std::to_string(i) + " (" + st.name + ") is singular");
    const Matrix got = congruence_unchecked(cur, st.matrix, c.q);
    if (!(got == st.claimed)) return bad(i, "step " + std::to_string(i) + " (" + st.name + ") claim does not replay");
    cur = got;
    prod = prod * st.matrix;
  }
  if (c.t.rows() != size || !c.t.square() || !(prod == c.t)) return bad(steps, "T is not the product of the steps");
  if (!(cur == verify_detail::expected_form(f, c.label, size)))
    return bad(steps, "final matrix is not the normal form of " + label_name(c.label.kind));
  if (!(congruence_unchecked(embed(c.input, emb), c.t, c.q) == cur)) return bad(steps, "T does not realize the final matrix");
  res.ok = true;
  return res;
}

}  // namespace twistform

#endif  // TWISTFORM_VERIFY_HPP
