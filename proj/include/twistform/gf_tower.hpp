#ifndef TWISTFORM_GF_TOWER_HPP
#define TWISTFORM_GF_TOWER_HPP

// Exact arithmetic in F_{p^d}. Elements are packed as integer codes
// sum c_i p^i over the power basis of the generator, so code order is the
// lexicographic element order (0 first, then 1, 2, ..., g, 1+g, ...).

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "twistform/error.hpp"

namespace twistform {

using Code = std::uint64_t;

inline constexpr unsigned kDefaultMaxDegree = 24;
inline constexpr unsigned kMaxSupportedDegree = 63;
inline constexpr Code kTableLimit = Code{1} << 16;
inline constexpr Code kEnumerationLimit = Code{1} << 20;

namespace detail {

using u128 = unsigned __int128;

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t f = 2; f * f <= n; ++f)
    if (n % f == 0) return false;
  return true;
}

// p^d, or nullopt when it does not fit below 2^63.
inline std::optional<std::uint64_t> checked_pow(std::uint64_t p, unsigned d) {
  u128 acc = 1;
  for (unsigned i = 0; i < d; ++i) {
    acc *= p;
    if (acc >= (u128{1} << 63)) return std::nullopt;
  }
  return static_cast<std::uint64_t>(acc);
}

inline std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t f = 2; f * f <= n; ++f) {
    if (n % f != 0) continue;
    out.push_back(f);
    while (n % f == 0) n /= f;
  }
  if (n > 1) out.push_back(n);
  return out;
}

// Inverse of a modulo m, for gcd(a, m) = 1 and m >= 1.
inline std::uint64_t inverse_mod(std::uint64_t a, std::uint64_t m) {
  if (m == 1) return 0;
  __int128 t = 0, new_t = 1;
  __int128 r = m, new_r = a % m;
  while (new_r != 0) {
    __int128 quot = r / new_r;
    std::tie(t, new_t) = std::make_pair(new_t, t - quot * new_t);
    std::tie(r, new_r) = std::make_pair(new_r, r - quot * new_r);
  }
  if (r != 1) fail(ErrorKind::Internal, "inverse_mod of non-unit");
  if (t < 0) t += m;
  return static_cast<std::uint64_t>(t);
}

// Dense polynomials over the prime field, ascending coefficients, trimmed.
using PrimePoly = std::vector<std::uint32_t>;

inline void trim(PrimePoly& f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
}

inline PrimePoly prime_poly_mod(PrimePoly a, const PrimePoly& m, std::uint32_t p) {
  trim(a);
  const std::size_t dm = m.size() - 1;
  const std::uint64_t lead_inv = inverse_mod(m.back(), p);
  while (a.size() > dm) {
    const std::uint64_t c = mulmod(a.back(), lead_inv, p);
    const std::size_t shift = a.size() - 1 - dm;
    for (std::size_t i = 0; i <= dm; ++i) {
      const std::uint64_t sub = mulmod(c, m[i], p);
      a[shift + i] = static_cast<std::uint32_t>((a[shift + i] + p - sub) % p);
    }
    trim(a);
  }
  return a;
}

inline PrimePoly prime_poly_mulmod(const PrimePoly& a, const PrimePoly& b, const PrimePoly& m,
                                   std::uint32_t p) {
  if (a.empty() || b.empty()) return {};
  std::vector<std::uint64_t> acc(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) acc[i + j] = (acc[i + j] + std::uint64_t{a[i]} * b[j]) % p;
  PrimePoly prod(acc.begin(), acc.end());
  return prime_poly_mod(std::move(prod), m, p);
}

inline PrimePoly prime_poly_powmod(PrimePoly base, std::uint64_t e, const PrimePoly& m, std::uint32_t p) {
  PrimePoly result{1};
  base = prime_poly_mod(std::move(base), m, p);
  while (e > 0) {
    if (e & 1) result = prime_poly_mulmod(result, base, m, p);
    base = prime_poly_mulmod(base, base, m, p);
    e >>= 1;
  }
  return result;
}

inline PrimePoly prime_poly_gcd(PrimePoly a, PrimePoly b, std::uint32_t p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    PrimePoly r = prime_poly_mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

// Distinct-degree test: f of degree d is irreducible iff
// gcd(x^{p^j} - x, f) = 1 for every 1 <= j <= d/2.
inline bool is_irreducible(const PrimePoly& f, std::uint32_t p) {
  const std::size_t d = f.size() - 1;
  if (d == 1) return true;
  if (f[0] == 0) return false;
  PrimePoly h{0, 1};
  for (std::size_t j = 1; j <= d / 2; ++j) {
    h = prime_poly_powmod(h, p, f, p);
    PrimePoly diff = h;
    if (diff.size() < 2) diff.resize(2, 0);
    diff[1] = static_cast<std::uint32_t>((diff[1] + p - 1) % p);
    trim(diff);
    if (diff.empty()) return false;
    if (prime_poly_gcd(f, diff, p).size() > 1) return false;
  }
  return true;
}

// Lexicographically smallest monic irreducible of degree d, comparing
// c_0 first, then c_1, and so on.
inline PrimePoly smallest_irreducible(std::uint32_t p, unsigned d) {
  std::vector<std::uint32_t> digits(d, 0);  // digits[0] = c_0 is most significant
  if (d >= 2) digits[0] = 1;
  while (true) {
    PrimePoly f(digits.begin(), digits.end());
    f.push_back(1);
    if (is_irreducible(f, p)) return f;
    std::size_t pos = d;
    while (pos > 0) {
      --pos;
      if (++digits[pos] < p) break;
      digits[pos] = 0;
      if (pos == 0) fail(ErrorKind::Internal, "no irreducible polynomial found");
    }
  }
}

}  // namespace detail

class Field;
using FieldPtr = std::shared_ptr<const Field>;

/// Immutable finite field context F_{p^d} = F_p[x]/(f).
///
/// All arithmetic works on packed codes. Fields with at most 2^16 elements
/// carry discrete log tables; larger ones multiply by schoolbook reduction.
class Field {
 public:
  Field(std::uint32_t p, unsigned d, detail::PrimePoly modulus) : p_(p), d_(d), modulus_(std::move(modulus)) {
    auto order = detail::checked_pow(p, d);
    require(order.has_value(), ErrorKind::InvalidArgument, "field too large for 64-bit codes");
    order_ = *order;
    require(modulus_.size() == d + 1 && modulus_.back() == 1, ErrorKind::Internal, "modulus must be monic of degree d");
    pow_p_.resize(d + 1);
    pow_p_[0] = 1;
    for (unsigned i = 1; i <= d; ++i) pow_p_[i] = pow_p_[i - 1] * p;
    if (p == 2) {
      for (unsigned i = 0; i <= d; ++i)
        if (modulus_[i]) mod_bits_ |= detail::u128{1} << i;
    }
    frob_basis_.resize(d);
    Code g_i = 1;
    for (unsigned i = 0; i < d; ++i) {
      frob_basis_[i] = generic_pow(g_i, p);
      g_i = generic_mul(g_i, generator());
    }
    if (order_ <= kTableLimit && order_ > 2) build_tables();
  }

  std::uint32_t characteristic() const noexcept { return p_; }
  unsigned degree() const noexcept { return d_; }
  Code order() const noexcept { return order_; }
  const std::vector<std::uint32_t>& modulus() const noexcept { return modulus_; }

  /// Class of x in F_p[x]/(f); equals 0 for the prime field presented by f = x.
  Code generator() const noexcept { return d_ == 1 ? 0 : p_; }

  bool contains(Code a) const noexcept { return a < order_; }

  Code from_int(std::int64_t v) const noexcept {
    std::int64_t r = v % static_cast<std::int64_t>(p_);
    if (r < 0) r += p_;
    return static_cast<Code>(r);
  }

  std::vector<std::uint32_t> coeffs(Code a) const {
    std::vector<std::uint32_t> out(d_);
    for (unsigned i = 0; i < d_; ++i) {
      out[i] = static_cast<std::uint32_t>(a % p_);
      a /= p_;
    }
    return out;
  }

  Code from_coeffs(std::span<const std::uint32_t> c) const {
    require(c.size() == d_, ErrorKind::Malformed, "coefficient vector has wrong length");
    Code out = 0;
    for (unsigned i = d_; i-- > 0;) {
      require(c[i] < p_, ErrorKind::Malformed, "coefficient out of range");
      out = out * p_ + c[i];
    }
    return out;
  }

  Code add(Code a, Code b) const noexcept {
    if (p_ == 2) return a ^ b;
    if (d_ == 1) return (a + b) % p_;
    Code out = 0;
    for (unsigned i = 0; i < d_; ++i) {
      const Code s = (a % p_ + b % p_) % p_;
      out += s * pow_p_[i];
      a /= p_;
      b /= p_;
    }
    return out;
  }

  Code neg(Code a) const noexcept {
    if (p_ == 2) return a;
    if (d_ == 1) return a == 0 ? 0 : p_ - a;
    Code out = 0;
    for (unsigned i = 0; i < d_; ++i) {
      const Code c = a % p_;
      out += (c == 0 ? 0 : p_ - c) * pow_p_[i];
      a /= p_;
    }
    return out;
  }

  Code sub(Code a, Code b) const noexcept { return add(a, neg(b)); }

  Code mul(Code a, Code b) const noexcept {
    if (a == 0 || b == 0) return 0;
    if (!exp_.empty()) {
      std::uint32_t e = log_[a] + log_[b];
      if (e >= order_ - 1) e -= static_cast<std::uint32_t>(order_ - 1);
      return exp_[e];
    }
    return generic_mul(a, b);
  }

  Code pow(Code a, std::uint64_t e) const noexcept {
    if (e == 0) return 1;
    if (a == 0) return 0;
    if (!exp_.empty()) return exp_[static_cast<std::size_t>(detail::mulmod(log_[a], e % (order_ - 1), order_ - 1))];
    return generic_pow(a, e);
  }

  Code inv(Code a) const {
    if (a == 0) fail(ErrorKind::DivisionByZero, "inverse of zero");
    if (!exp_.empty()) return exp_[(order_ - 1 - log_[a]) % (order_ - 1)];
    return generic_pow(a, order_ - 2);
  }

  Code div(Code a, Code b) const { return mul(a, inv(b)); }

  /// a^{p^k}; negative k gives the inverse automorphism.
  Code frobenius(Code a, std::int64_t k) const noexcept {
    std::int64_t r = k % static_cast<std::int64_t>(d_);
    if (r < 0) r += d_;
    if (r == 0 || a == 0) return a;
    if (!exp_.empty()) {
      return exp_[static_cast<std::size_t>(detail::mulmod(log_[a], pow_p_[r] % (order_ - 1), order_ - 1))];
    }
    for (std::int64_t i = 0; i < r; ++i) a = apply_frob_once(a);
    return a;
  }

  /// Smallest y (in code order) with y^k = a, if one exists in this field.
  std::optional<Code> kth_root(Code a, std::uint64_t k) const;

  bool operator==(const Field& other) const noexcept {
    return p_ == other.p_ && d_ == other.d_ && modulus_ == other.modulus_;
  }

  std::string name() const { return "F_" + std::to_string(p_) + (d_ > 1 ? "^" + std::to_string(d_) : ""); }

 private:
  Code generic_mul(Code a, Code b) const noexcept {
    if (a == 0 || b == 0) return 0;
    if (d_ == 1) return detail::mulmod(a, b, p_);
    if (p_ == 2) {
      detail::u128 prod = 0;
      for (unsigned i = 0; i < d_; ++i)
        if ((b >> i) & 1) prod ^= static_cast<detail::u128>(a) << i;
      for (unsigned k = 2 * d_ - 1; k-- > d_;)
        if ((prod >> k) & 1) prod ^= mod_bits_ << (k - d_);
      return static_cast<Code>(prod);
    }
    std::array<std::uint64_t, 2 * kMaxSupportedDegree> acc{};
    std::array<std::uint32_t, kMaxSupportedDegree> ad{}, bd{};
    for (unsigned i = 0; i < d_; ++i) {
      ad[i] = static_cast<std::uint32_t>(a % p_);
      bd[i] = static_cast<std::uint32_t>(b % p_);
      a /= p_;
      b /= p_;
    }
    for (unsigned i = 0; i < d_; ++i) {
      if (ad[i] == 0) continue;
      for (unsigned j = 0; j < d_; ++j) acc[i + j] = (acc[i + j] + std::uint64_t{ad[i]} * bd[j]) % p_;
    }
    for (unsigned k = 2 * d_ - 1; k-- > d_;) {
      const std::uint64_t c = acc[k] % p_;
      if (c == 0) continue;
      for (unsigned i = 0; i < d_; ++i) acc[k - d_ + i] = (acc[k - d_ + i] + (p_ - c) * modulus_[i]) % p_;
      acc[k] = 0;
    }
    Code out = 0;
    for (unsigned i = d_; i-- > 0;) out = out * p_ + acc[i] % p_;
    return out;
  }

  Code generic_pow(Code a, std::uint64_t e) const noexcept {
    Code result = 1;
    while (e > 0) {
      if (e & 1) result = generic_mul(result, a);
      a = generic_mul(a, a);
      e >>= 1;
    }
    return result;
  }

  Code apply_frob_once(Code a) const noexcept {
    Code out = 0;
    for (unsigned i = 0; i < d_; ++i) {
      const Code c = a % p_;
      a /= p_;
      if (c == 0) continue;
      out = add(out, c == 1 ? frob_basis_[i] : generic_mul(c, frob_basis_[i]));
    }
    return out;
  }

  void build_tables() {
    const Code m = order_ - 1;
    const auto factors = detail::prime_factors(m);
    Code prim = 0;
    for (Code cand = 2; cand < order_ && prim == 0; ++cand) {
      bool ok = true;
      for (auto f : factors)
        if (generic_pow(cand, m / f) == 1) ok = false;
      if (ok) prim = cand;
    }
    if (prim == 0) fail(ErrorKind::Internal, "no primitive element");
    std::vector<std::uint32_t> exp(m), log(order_, 0);
    Code x = 1;
    for (Code i = 0; i < m; ++i) {
      exp[i] = static_cast<std::uint32_t>(x);
      log[x] = static_cast<std::uint32_t>(i);
      x = generic_mul(x, prim);
    }
    exp_ = std::move(exp);
    log_ = std::move(log);
  }

  std::uint32_t p_;
  unsigned d_;
  detail::PrimePoly modulus_;
  Code order_ = 0;
  std::vector<Code> pow_p_;
  detail::u128 mod_bits_ = 0;
  std::vector<Code> frob_basis_;
  std::vector<std::uint32_t> exp_, log_;
};

inline std::optional<Code> Field::kth_root(Code a, std::uint64_t k) const {
  require(k >= 1, ErrorKind::InvalidArgument, "root index must be positive");
  if (a == 0) return Code{0};
  const std::uint64_t m = order_ - 1;
  const std::uint64_t g = std::gcd(k, m);
  if (pow(a, m / g) != 1) return std::nullopt;
  // Split the cyclic group of order m as (order r1) x (order r2) with r1
  // built from the primes of k and gcd(k, r2) = 1.
  std::uint64_t r1 = 1, r2 = m;
  const auto k_primes = detail::prime_factors(k);
  for (auto l : k_primes)
    while (r2 % l == 0) {
      r2 /= l;
      r1 *= l;
    }
  const std::uint64_t u1 = detail::inverse_mod(r1 % r2, r2);  // r1*u1 = 1 mod r2
  const std::uint64_t u2 = detail::inverse_mod(r2 % r1, r1);  // r2*u2 = 1 mod r1
  const Code a1 = pow(a, static_cast<std::uint64_t>(static_cast<detail::u128>(r2) * u2 % m));
  const Code a2 = pow(a, static_cast<std::uint64_t>(static_cast<detail::u128>(r1) * u1 % m));
  const Code y2 = pow(a2, detail::inverse_mod(k % r2, r2));
  if (r1 == 1) return y2;

  const auto r1_primes = detail::prime_factors(r1);
  Code h1 = 0;
  for (Code z = 2; z < order_ && h1 == 0; ++z) {
    const Code cand = pow(z, r2);
    bool ok = true;
    for (auto l : r1_primes)
      if (pow(cand, r1 / l) == 1) ok = false;
    if (ok) h1 = cand;
  }
  if (h1 == 0) fail(ErrorKind::Internal, "no generator of the smooth subgroup");

  // Pohlig-Hellman: discrete log of a1 to base h1 in the group of order r1.
  std::uint64_t log_a1 = 0, modulus = 1;
  for (auto l : r1_primes) {
    std::uint64_t le = 1;
    unsigned e = 0;
    while (r1 % (le * l) == 0) {
      le *= l;
      ++e;
    }
    const Code base = pow(h1, r1 / le);   // order l^e
    const Code target = pow(a1, r1 / le);
    const Code gamma = pow(base, le / l);  // order l
    std::uint64_t x = 0, lpow = 1;
    for (unsigned i = 0; i < e; ++i) {
      const Code shifted = mul(target, inv(pow(base, x)));
      const Code hk = pow(shifted, le / (lpow * l));
      std::uint64_t digit = 0;
      Code acc = 1;
      while (acc != hk) {
        acc = mul(acc, gamma);
        ++digit;
        if (digit > l) fail(ErrorKind::Internal, "discrete log digit not found");
      }
      x += digit * lpow;
      lpow *= l;
    }
    // CRT combine log_a1 (mod modulus) with x (mod le).
    const std::uint64_t t = detail::mulmod((x + le - log_a1 % le) % le, detail::inverse_mod(modulus % le, le), le);
    log_a1 += modulus * t;
    modulus *= le;
  }
  // Solve k * j = log_a1 (mod r1).
  const std::uint64_t g1 = std::gcd(k % r1 == 0 ? r1 : k % r1, r1);
  if (log_a1 % g1 != 0) fail(ErrorKind::Internal, "root existence test and discrete log disagree");
  const std::uint64_t rr = r1 / g1;
  const std::uint64_t j = detail::mulmod((log_a1 / g1) % rr, detail::inverse_mod((k / g1) % rr, rr), rr);
  const Code y1 = pow(h1, j);
  const Code y = mul(y1, y2);

  // All roots are y * zeta with zeta in mu_g, which lives in <h1>.
  const Code zeta = pow(h1, r1 / g);
  Code best = y, cur = y;
  for (std::uint64_t i = 1; i < g; ++i) {
    cur = mul(cur, zeta);
    best = std::min(best, cur);
  }
  return best;
}

/// Deterministic field construction: the defining polynomial is the
/// lexicographically smallest monic irreducible of degree d.
inline FieldPtr build_field(std::uint32_t p, unsigned d, unsigned max_degree = kDefaultMaxDegree) {
  require(detail::is_prime(p), ErrorKind::InvalidArgument, "characteristic " + std::to_string(p) + " is not prime");
  require(d >= 1, ErrorKind::InvalidArgument, "degree must be at least 1");
  if (d > max_degree || d > kMaxSupportedDegree)
    fail(ErrorKind::ExtensionCap, "degree " + std::to_string(d) + " exceeds cap " + std::to_string(max_degree));
  if (!detail::checked_pow(p, d)) fail(ErrorKind::ExtensionCap, "F_" + std::to_string(p) + "^" + std::to_string(d) + " does not fit 64-bit codes");
  return std::make_shared<const Field>(p, d, detail::smallest_irreducible(p, d));
}

inline bool same_field(const FieldPtr& a, const FieldPtr& b) { return a == b || (a && b && *a == *b); }

inline void require_same_field(const FieldPtr& a, const FieldPtr& b) {
  if (!same_field(a, b)) fail(ErrorKind::FieldMismatch, a->name() + " vs " + b->name());
}

/// Value-type element handle.
class FieldElem {
 public:
  FieldElem(FieldPtr field, Code code) : field_(std::move(field)), code_(code) {
    require(field_->contains(code_), ErrorKind::Malformed, "element code out of range");
  }

  static FieldElem zero(FieldPtr f) { return {std::move(f), 0}; }
  static FieldElem one(FieldPtr f) { return {std::move(f), 1}; }
  static FieldElem generator(FieldPtr f) {
    const Code g = f->generator();
    return {std::move(f), g};
  }
  static FieldElem from_coeffs(FieldPtr f, std::span<const std::uint32_t> c) {
    const Code code = f->from_coeffs(c);
    return {std::move(f), code};
  }

  const FieldPtr& field() const noexcept { return field_; }
  Code code() const noexcept { return code_; }
  std::vector<std::uint32_t> coeffs() const { return field_->coeffs(code_); }
  bool is_zero() const noexcept { return code_ == 0; }

  FieldElem inv() const { return {field_, field_->inv(code_)}; }
  FieldElem pow(std::uint64_t e) const { return {field_, field_->pow(code_, e)}; }

  friend FieldElem operator+(const FieldElem& a, const FieldElem& b) {
    require_same_field(a.field_, b.field_);
    return {a.field_, a.field_->add(a.code_, b.code_)};
  }
  friend FieldElem operator-(const FieldElem& a, const FieldElem& b) {
    require_same_field(a.field_, b.field_);
    return {a.field_, a.field_->sub(a.code_, b.code_)};
  }
  friend FieldElem operator*(const FieldElem& a, const FieldElem& b) {
    require_same_field(a.field_, b.field_);
    return {a.field_, a.field_->mul(a.code_, b.code_)};
  }
  friend FieldElem operator/(const FieldElem& a, const FieldElem& b) {
    require_same_field(a.field_, b.field_);
    return {a.field_, a.field_->div(a.code_, b.code_)};
  }
  FieldElem operator-() const { return {field_, field_->neg(code_)}; }

  friend bool operator==(const FieldElem& a, const FieldElem& b) {
    return same_field(a.field_, b.field_) && a.code_ == b.code_;
  }

 private:
  FieldPtr field_;
  Code code_;
};

/// x^{q^i} for q = p^e; i < 0 takes the inverse Frobenius, so no extension
/// is ever needed.
inline unsigned twist_exponent(const Field& f, std::uint64_t q) {
  require(q >= 2, ErrorKind::InvalidArgument, "twist q must be a prime power");
  unsigned e = 0;
  std::uint64_t v = q;
  while (v % f.characteristic() == 0) {
    v /= f.characteristic();
    ++e;
  }
  require(v == 1, ErrorKind::InvalidArgument,
          "q = " + std::to_string(q) + " is not a power of the characteristic " + std::to_string(f.characteristic()));
  return e;
}

inline FieldElem frobenius_pow(const FieldElem& x, std::uint64_t q, std::int64_t i) {
  const unsigned e = twist_exponent(*x.field(), q);
  return {x.field(), x.field()->frobenius(x.code(), static_cast<std::int64_t>(e) * i)};
}

/// Elements of a field in code order, without materializing them.
class ElementRange {
 public:
  class iterator {
   public:
    using value_type = FieldElem;
    using difference_type = std::ptrdiff_t;
    iterator() = default;
    iterator(const FieldPtr* f, Code c) : field_(f), code_(c) {}
    FieldElem operator*() const { return {*field_, code_}; }
    iterator& operator++() {
      ++code_;
      return *this;
    }
    iterator operator++(int) {
      auto tmp = *this;
      ++code_;
      return tmp;
    }
    bool operator==(const iterator& o) const { return code_ == o.code_; }

   private:
    const FieldPtr* field_ = nullptr;
    Code code_ = 0;
  };

  explicit ElementRange(FieldPtr f) : field_(std::move(f)) {}
  iterator begin() const { return {&field_, 0}; }
  iterator end() const { return {&field_, field_->order()}; }
  Code size() const { return field_->order(); }

 private:
  FieldPtr field_;
};

inline ElementRange enumerate_elements(const FieldPtr& f) {
  if (f->order() > kEnumerationLimit)
    fail(ErrorKind::Budget, f->name() + " has more than 2^20 elements");
  return ElementRange(f);
}

// ---------------------------------------------------------------------------
// Polynomials over a Field (root adjunction for embeddings).

class Poly {
 public:
  Poly(FieldPtr f, std::vector<Code> coeffs) : field_(std::move(f)), c_(std::move(coeffs)) { trim(); }

  const FieldPtr& field() const noexcept { return field_; }
  const std::vector<Code>& coeffs() const noexcept { return c_; }
  bool is_zero() const noexcept { return c_.empty(); }
  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  Code lead() const { return c_.back(); }

  Code eval(Code x) const {
    Code acc = 0;
    for (std::size_t i = c_.size(); i-- > 0;) acc = field_->add(field_->mul(acc, x), c_[i]);
    return acc;
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    std::vector<Code> out(std::max(a.c_.size(), b.c_.size()), 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const Code x = i < a.c_.size() ? a.c_[i] : 0;
      const Code y = i < b.c_.size() ? b.c_[i] : 0;
      out[i] = a.field_->add(x, y);
    }
    return {a.field_, std::move(out)};
  }

  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return {a.field_, {}};
    std::vector<Code> out(a.c_.size() + b.c_.size() - 1, 0);
    const Field& f = *a.field_;
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      if (a.c_[i] == 0) continue;
      for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] = f.add(out[i + j], f.mul(a.c_[i], b.c_[j]));
    }
    return {a.field_, std::move(out)};
  }

  /// (quotient, remainder) of a by nonzero b.
  friend std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
    if (b.is_zero()) fail(ErrorKind::DivisionByZero, "polynomial division by zero");
    const Field& f = *a.field_;
    std::vector<Code> rem = a.c_;
    const int db = b.degree();
    std::vector<Code> quot(std::max(0, a.degree() - db + 1), 0);
    const Code lead_inv = f.inv(b.lead());
    for (int k = a.degree(); k >= db; --k) {
      const Code c = f.mul(rem[k], lead_inv);
      if (c == 0) continue;
      quot[k - db] = c;
      for (int i = 0; i <= db; ++i) rem[k - db + i] = f.sub(rem[k - db + i], f.mul(c, b.c_[i]));
    }
    return {Poly(a.field_, std::move(quot)), Poly(a.field_, std::move(rem))};
  }

  Poly monic() const {
    if (is_zero()) return *this;
    const Code li = field_->inv(lead());
    std::vector<Code> out(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) out[i] = field_->mul(c_[i], li);
    return {field_, std::move(out)};
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }

  FieldPtr field_;
  std::vector<Code> c_;
};

inline Poly poly_gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

inline Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& m) { return divmod(a * b, m).second; }

inline Poly poly_powmod(Poly base, std::uint64_t e, const Poly& m) {
  Poly result(m.field(), {1});
  base = divmod(base, m).second;
  while (e > 0) {
    if (e & 1) result = poly_mulmod(result, base, m);
    base = poly_mulmod(base, base, m);
    e >>= 1;
  }
  return result;
}

/// Roots of a polynomial that splits into distinct linear factors over its
/// field, ascending in code order. Splits with gcd(f, Tr(c x) - t) for c
/// running over the power basis and t over F_p.
inline std::vector<Code> split_roots(const Poly& f) {
  const Field& F = *f.field();
  if (f.degree() <= 0) return {};
  if (f.degree() == 1) {
    const Poly m = f.monic();
    return {F.neg(m.coeffs()[0])};
  }
  Code basis = 1;
  for (unsigned b = 0; b < F.degree(); ++b) {
    Poly y = divmod(Poly(f.field(), {0, basis}), f).second;
    Poly trace = y;
    for (unsigned i = 1; i < F.degree(); ++i) {
      y = poly_powmod(y, F.characteristic(), f);
      trace = trace + y;
    }
    for (std::uint32_t t = 0; t < F.characteristic(); ++t) {
      Poly shifted = trace + Poly(f.field(), {F.neg(F.from_int(t))});
      Poly h = poly_gcd(f, shifted);
      if (h.degree() > 0 && h.degree() < f.degree()) {
        auto left = split_roots(h);
        auto right = split_roots(divmod(f, h).first);
        left.insert(left.end(), right.begin(), right.end());
        std::sort(left.begin(), left.end());
        return left;
      }
    }
    basis = F.mul(basis, F.generator() == 0 ? 1 : F.generator());
  }
  fail(ErrorKind::Internal, "polynomial does not split into distinct linear factors");
}

/// Field homomorphism F_{p^a} -> F_{p^b} determined by the image of the
/// source generator.
class Embedding {
 public:
  static Embedding identity(const FieldPtr& f) { return Embedding(f, f, f->generator()); }

  /// Sends the source generator to the smallest root of its defining
  /// polynomial in the target.
  static Embedding canonical(const FieldPtr& source, const FieldPtr& target) {
    if (same_field(source, target)) return identity(target);
    require(source->characteristic() == target->characteristic(), ErrorKind::FieldMismatch,
            "cannot embed across characteristics");
    require(target->degree() % source->degree() == 0, ErrorKind::FieldMismatch,
            source->name() + " does not embed in " + target->name());
    std::vector<Code> f(source->modulus().begin(), source->modulus().end());
    const Poly poly(target, f);
    auto roots = split_roots(poly);
    if (roots.empty()) fail(ErrorKind::Internal, "defining polynomial has no root in target");
    // split_roots returns every root; the Galois orbit is all of them.
    return Embedding(source, target, roots.front());
  }

  /// Validates that `image` is a root of the source defining polynomial.
  static Embedding from_image(const FieldPtr& source, const FieldPtr& target, Code image) {
    require(source->characteristic() == target->characteristic() && target->degree() % source->degree() == 0,
            ErrorKind::FieldMismatch, source->name() + " does not embed in " + target->name());
    require(target->contains(image), ErrorKind::Malformed, "embedding image out of range");
    std::vector<Code> f(source->modulus().begin(), source->modulus().end());
    require(Poly(target, f).eval(image) == 0, ErrorKind::Malformed, "embedding image is not a root");
    return Embedding(source, target, image);
  }

  const FieldPtr& source() const noexcept { return source_; }
  const FieldPtr& target() const noexcept { return target_; }
  Code generator_image() const noexcept { return image_; }

  Code operator()(Code x) const {
    if (source_->degree() == 1) return x;
    const Field& t = *target_;
    Code out = 0;
    for (unsigned i = 0; i < source_->degree(); ++i) {
      const Code c = x % source_->characteristic();
      x /= source_->characteristic();
      if (c != 0) out = t.add(out, t.mul(c, powers_[i]));
    }
    return out;
  }

  FieldElem operator()(const FieldElem& x) const {
    require_same_field(x.field(), source_);
    return {target_, (*this)(x.code())};
  }

  /// next o this.
  Embedding then(const Embedding& next) const {
    require_same_field(target_, next.source_);
    return Embedding(source_, next.target_, next(image_));
  }

 private:
  Embedding(FieldPtr source, FieldPtr target, Code image)
      : source_(std::move(source)), target_(std::move(target)), image_(image) {
    powers_.resize(source_->degree());
    Code acc = 1;
    for (auto& pw : powers_) {
      pw = acc;
      acc = target_->mul(acc, image_);
    }
  }

  FieldPtr source_, target_;
  Code image_;
  std::vector<Code> powers_;
};

inline FieldElem embed(const FieldElem& x, const FieldPtr& target) { return Embedding::canonical(x.field(), target)(x); }

struct RootResult {
  FieldElem root;
  Embedding embedding;  // from the input's field into the root's field
};

/// y with y^k = x, searching the chain d, 2d, 3d, ... for the first field
/// that contains a root.
inline RootResult kth_root(const FieldElem& x, std::uint64_t k, unsigned max_degree = kDefaultMaxDegree) {
  const FieldPtr& base = x.field();
  if (x.is_zero() || k == 1) return {x, Embedding::identity(base)};
  for (unsigned mult = 1; base->degree() * mult <= max_degree; ++mult) {
    FieldPtr f = mult == 1 ? base : build_field(base->characteristic(), base->degree() * mult, max_degree);
    Embedding emb = Embedding::canonical(base, f);
    if (auto r = f->kth_root(emb(x.code()), k)) return {FieldElem(f, *r), emb};
  }
  fail(ErrorKind::ExtensionCap, std::to_string(k) + "-th root needs degree beyond " + std::to_string(max_degree));
}

}  // namespace twistform

#endif  // TWISTFORM_GF_TOWER_HPP
