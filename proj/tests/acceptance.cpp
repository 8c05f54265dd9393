// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Each criterion also has to finish inside its time limit.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "twistform/twistform.hpp"

using namespace twistform;

namespace {

// Naive tT A T^(q) straight from the definition.
Matrix oracle_congruence(const Matrix& a, const Matrix& t, std::uint64_t q) {
  const Field& f = *a.field();
  const std::size_t n = a.rows();
  Matrix out(a.field(), n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Code acc = 0;
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
          acc = f.add(acc, f.mul(f.mul(t(k, i), a(k, l)), f.pow(t(l, j), q)));
      out(i, j) = acc;
    }
  return out;
}

bool oracle_is_identity(const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != (i == j ? 1u : 0u)) return false;
  return true;
}

struct Outcome {
  bool ok = true;
  std::ostringstream detail;
  void check(bool cond, const std::string& what) {
    if (!cond && ok) detail << "first failure: " << what << "; ";
    ok = ok && cond;
  }
};

bool run(int index, const std::string& title, double limit_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail << "exception: " << e.what() << "; ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > limit_s) {
    out.ok = false;
    out.detail << "over time limit " << limit_s << " s; ";
  }
  std::printf("%s criterion %d: %s (%.2f s) %s\n", out.ok ? "PASS" : "FAIL", index, title.c_str(), secs,
              out.detail.str().c_str());
  std::fflush(stdout);
  return out.ok;
}

// 1. Full-rank normalization.
void criterion_full_rank(Outcome& o) {
  std::mt19937_64 rng(101);
  std::size_t total = 0;
  auto check = [&](const Matrix& a, std::uint64_t q) {
    const auto w = normalize_full_rank(a, q);
    const Matrix lifted = embed(a, w.embedding);
    o.check(oracle_is_identity(oracle_congruence(lifted, w.t, q)), "tT A T^(q) != I over " + w.field->name());
    ++total;
  };
  const FieldPtr f2 = build_field(2, 1);
  for (const auto& a : enumerate_gl(f2, 2, 1 << 10)) check(a, 2);
  o.check(total == 6, "|GL_2(F_2)| != 6");
  struct Case { std::uint32_t p; unsigned d; std::size_t size; std::uint64_t q; };
  for (const Case c : {Case{2, 2, 2, 2}, Case{2, 1, 3, 2}, Case{2, 2, 3, 2}, Case{3, 2, 2, 3}}) {
    const FieldPtr f = build_field(c.p, c.d);
    for (int i = 0; i < 100; ++i) check(random_invertible(f, c.size, rng), c.q);
  }
  o.detail << total << " matrices; ";
}

// 2. Corank-one pipeline on congruence(W_s, T, q).
void criterion_pipeline(Outcome& o) {
  const std::vector<std::pair<std::uint32_t, unsigned>> fields = {{2, 1}, {3, 1}, {2, 2}, {2, 3},
                                                                  {3, 2}, {2, 4}, {3, 3}, {3, 4}};
  std::vector<FieldPtr> fp;
  for (auto [p, d] : fields) fp.push_back(build_field(p, d));
  std::mt19937_64 rng(202);
  std::size_t total = 0;
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t s = 0; s <= n; ++s)
      for (int i = 0; i < 50; ++i) {
        const FieldPtr& f = fp[static_cast<std::size_t>(i) % fp.size()];
        const std::uint64_t q = f->characteristic();
        const Matrix a = oracle_congruence(w_matrix(f, n, s), random_invertible(f, n + 1, rng), q);
        const Certificate c = classify_corank_one(a, q);
        const std::string where = "n=" + std::to_string(n) + " s=" + std::to_string(s) + " over " + f->name();
        o.check(c.label.kind == LabelKind::Ws && c.label.s == static_cast<int>(s), "wrong label at " + where);
        o.check(verify_certificate(c).ok, "certificate does not replay at " + where);
        ++total;
      }
  o.detail << total << " certificates; ";
}

// 3. Uniqueness at desk scale.
void criterion_uniqueness(Outcome& o) {
  const OrbitReport rep = brute_force_orbits(1, 2, 1, 1);
  o.check(rep.separated, "W_0 and W_1 share an orbit");
  o.check(rep.labels_agree, "orbit labels disagree with the pipeline");
  o.detail << "orbit ladder degrees";
  for (const auto& l : rep.levels) o.detail << " " << l.degree;
  o.detail << "; ";

  for (std::uint64_t q : {2u, 3u}) {
    for (std::size_t n = 1; n <= 3; ++n) {
      std::set<std::vector<std::uint64_t>> seen;
      for (std::size_t s = 0; s <= n; ++s) {
        std::vector<std::uint64_t> counts;
        for (unsigned j = 1; j <= 3; ++j) {
          const FieldPtr f = build_field(static_cast<std::uint32_t>(q), j);
          counts.push_back(count_points(w_matrix(f, n, s), q, f));
        }
        seen.insert(counts);
      }
      o.check(seen.size() == n + 1, "count vectors collide for n=" + std::to_string(n) + " q=" + std::to_string(q));
    }
  }

  const FieldPtr f4 = build_field(2, 2);
  o.check(count_points(w_matrix(f4, 1, 0), 2, f4) == 2, "X_0^1 over F_4 does not have 2 points");
  for (unsigned d = 1; d <= 3; ++d) {
    const FieldPtr f = build_field(2, d);
    o.check(count_points(w_matrix(f, 1, 1), 2, f) == 1, "X_1^1 does not have 1 point over " + f->name());
  }
  const Matrix x22 = w_matrix(f4, 2, 2);
  const auto pts = enum_points(x22, 2, f4);
  o.check(pts.size() == 13, "X_2^2 over F_4 does not have 13 points");
  // Lines through P_0 = (0:0:1) contained in the curve.
  std::set<Vec> lines;
  for (const auto& x : pts) {
    if (x[0] == 0 && x[1] == 0) continue;
    bool whole = true;
    for (Code mu = 0; mu < f4->order(); ++mu) whole = whole && form_value(x22, 2, Vec{x[0], x[1], mu}, Vec{x[0], x[1], mu}) == 0;
    o.check(whole, "a point of X_2^2 is not on a line through P_0 inside the curve");
    lines.insert(normalize_point(*f4, Vec{x[0], x[1]}));
  }
  o.check(lines.size() == 3, "X_2^2 over F_4 is not a union of q + 1 = 3 lines");
}

// 4. Automorphism conditions.
void criterion_aut(Outcome& o) {
  std::size_t total = 0, members = 0, literal_mismatch = 0;
  for (unsigned d : {1u, 2u}) {
    const FieldPtr f = build_field(2, d);
    for (const auto& m : enumerate_gl(f, 3, 1 << 20)) {
      for (std::size_t s = 0; s <= 2; ++s) {
        const bool member = aut_membership(m, s, 2, 2).has_value();
        const AutReport rep = aut_structural_check(m, s, 2, 2);
        o.check(member == rep.holds, "membership and structural check disagree (s=" + std::to_string(s) + ")");
        if (member != literal_conditions_hold(rep)) ++literal_mismatch;
        members += member;
        ++total;
      }
    }
  }
  o.check(total == 3 * (168 + 181440), "unexpected group orders");
  o.detail << total << " (M, s) pairs, " << members << " members, " << literal_mismatch
           << " where the literal (i)-(v) reading differs; ";
}

// 5. Plane curves.
void criterion_plane(Outcome& o) {
  const FieldPtr f2 = build_field(2, 1);
  std::map<std::string, std::size_t> tally;
  for (const auto& a : enumerate_rank(f2, 3, 1, 1 << 10)) {
    const Certificate c = classify_plane(a, 2);
    o.check(verify_certificate(c).ok, "rank-1 certificate fails");
    ++tally[label_name(c.label.kind)];
  }
  for (const auto& a : enumerate_rank(f2, 3, 2, 1 << 10)) {
    const Certificate c = classify_plane(a, 2);
    o.check(verify_certificate(c).ok, "rank-2 certificate fails");
    ++tally[label_name(c.label.kind)];
  }
  std::size_t total = 0;
  for (const auto& [k, v] : tally) {
    o.detail << k << "=" << v << " ";
    total += v;
  }
  o.check(total == 512 - 168 - 1, "not every nonzero singular matrix was classified");
  o.check(tally.size() == 5, "not all five plane classes occur");

  const FieldPtr f16 = build_field(2, 4);
  const auto x1 = strangeness_center(w_matrix(f16, 2, 1), 2, f16);
  o.check(x1.outcome == StrangeOutcome::Center && x1.center == Vec({0, 1, 0}), "X_1 center is not (0:1:0)");
  const auto fermat = strangeness_center(Matrix::identity(f16, 3), 2, f16);
  o.check(fermat.outcome == StrangeOutcome::NoCenter, "Fermat cubic reports a center");
  o.detail << "; ";
}

// 6. Rationality.
void criterion_rational(Outcome& o) {
  const FieldPtr f16 = build_field(2, 4);
  for (auto [n, s] : {std::pair<std::size_t, std::size_t>{2, 1}, {3, 1}, {3, 2}}) {
    const auto rep = rational_roundtrip(s, n, 2, f16, 20, 606);
    o.check(rep.passed == 20 && rep.failures.empty(),
            "roundtrip failed for (n, s) = (" + std::to_string(n) + ", " + std::to_string(s) + ")");
  }
}

// 7. Genericity.
void criterion_generic(Outcome& o) {
  const FieldPtr f9 = build_field(3, 2);
  std::mt19937_64 rng(707);
  std::map<int, std::size_t> hist;
  const std::size_t samples = 500;
  for (std::size_t i = 0; i < samples; ++i) ++hist[classify_corank_one(random_rank_matrix(f9, 3, 2, rng), 3).label.s];
  for (const auto& [s, c] : hist) o.detail << "W_" << s << "=" << c << " ";
  o.check(2 * hist[1] > samples, "W_{n-1} is not the majority");
  o.detail << "; ";
}

// 8. Properties.
void criterion_properties(Outcome& o) {
  std::mt19937_64 rng(808);
  for (auto [p, d] : {std::pair<std::uint32_t, unsigned>{2, 2}, {3, 2}, {2, 4}, {5, 1}}) {
    const FieldPtr f = build_field(p, d);
    const std::uint64_t q = p;
    for (int i = 0; i < 30; ++i) {
      const Matrix a = random_matrix(f, 3, 3, rng), b = random_matrix(f, 3, 3, rng);
      const Matrix s = random_invertible(f, 3, rng), t = random_invertible(f, 3, rng);
      o.check(congruence(congruence(a, s, q), t, q) == congruence(a, s * t, q), "composition law");
      o.check(twist(a * b, q, 1) == twist(a, q, 1) * twist(b, q, 1), "twist of a product");
      o.check(twist(a + b, q, 1) == twist(a, q, 1) + twist(b, q, 1), "twist of a sum");
      o.check(twist(twist(a, q, 1), q, -1) == a, "twist inverse");
    }
    for (Code x = 0; x < f->order(); ++x)
      for (std::int64_t k : {1, 2, 3})
        o.check(f->frobenius(f->frobenius(x, k), -k) == x, "Frobenius roundtrip");
    for (std::uint64_t k : {2u, 3u, 4u, 5u}) {
      for (int i = 0; i < 10; ++i) {
        const FieldElem x(f, rng() % f->order());
        const auto r = kth_root(x, k, 24);
        o.check(r.root.pow(k) == r.embedding(x), "kth_root post-condition");
      }
    }
  }

  // Tamper detection: flip one coefficient of one matrix entry at a time.
  const FieldPtr f4 = build_field(2, 2), f2 = build_field(2, 1);
  std::vector<Certificate> certs;
  certs.push_back(classify(oracle_congruence(w_matrix(f4, 2, 1), random_invertible(f4, 3, rng), 2), 2));
  certs.push_back(classify(oracle_congruence(w_matrix(f2, 3, 0), random_invertible(f2, 4, rng), 2), 2));
  certs.push_back(classify(random_invertible(f4, 2, rng), 2));
  certs.push_back(classify(Matrix::from_rows(f2, {{1, 1, 0}, {1, 1, 0}, {0, 0, 0}}), 2));
  certs.push_back(classify(Matrix::from_rows(f2, {{0, 1, 0}, {0, 0, 0}, {0, 0, 0}}), 2));
  certs.push_back(classify(w_matrix(f2, 2, 1), 2));
  std::size_t mutations = 0, caught = 0;
  for (const auto& c : certs) {
    const Json good = certificate_to_json(c);
    o.check(verify_certificate(certificate_from_json(good)).ok, "untampered certificate fails");
    std::vector<Json::json_pointer> targets = {Json::json_pointer("/input"), Json::json_pointer("/T")};
    for (std::size_t i = 0; i < c.trace.size(); ++i) {
      targets.emplace_back("/trace/" + std::to_string(i) + "/matrix");
      targets.emplace_back("/trace/" + std::to_string(i) + "/claimed");
    }
    for (const auto& ptr : targets) {
      const Json& m = good.at(ptr);
      const auto p = m["field"]["p"].get<std::uint32_t>();
      for (std::size_t r = 0; r < m["rows"].get<std::size_t>(); ++r)
        for (std::size_t k = 0; k < m["cols"].get<std::size_t>(); ++k) {
          Json bad = good;
          auto& coeff = bad.at(ptr)["entries"][r][k]["coeffs"][0];
          coeff = (coeff.get<std::uint32_t>() + 1) % p;
          ++mutations;
          try {
            if (!verify_certificate(certificate_from_json(bad)).ok) ++caught;
          } catch (const Error&) {
            ++caught;
          }
        }
    }
  }
  o.check(caught == mutations, "a tampered certificate verified");
  o.detail << caught << "/" << mutations << " mutations rejected; ";
}

}  // namespace

int main() {
  bool all = true;
  all &= run(1, "full-rank normalization tT A T^(q) = I", 30, criterion_full_rank);
  all &= run(2, "corank-one pipeline recovers s with replayable certificates", 60, criterion_pipeline);
  all &= run(3, "uniqueness at desk scale", 120, criterion_uniqueness);
  all &= run(4, "automorphism conditions match the form stabilizer", 120, criterion_aut);
  all &= run(5, "plane curve classification and strangeness", 60, criterion_plane);
  all &= run(6, "rationality roundtrip", 10, criterion_rational);
  all &= run(7, "genericity of W_{n-1}", 30, criterion_generic);
  all &= run(8, "property suites and tamper detection", 30, criterion_properties);
  return all ? 0 : 1;
}
