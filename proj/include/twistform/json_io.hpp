#ifndef TWISTFORM_JSON_IO_HPP
#define TWISTFORM_JSON_IO_HPP

// JSON encoding shared by every command.
//
//   field    {"p": 2, "d": 2, "poly": [1, 1, 1]}        (ascending, monic)
//   element  {"p": 2, "d": 2, "coeffs": [0, 1]}
//   matrix   {"field": field, "rows": r, "cols": c, "entries": [[element, ...], ...]}

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "twistform/degeneration.hpp"
#include "twistform/error.hpp"
#include "twistform/gf_tower.hpp"
#include "twistform/twisted_linear.hpp"

namespace twistform {

using Json = nlohmann::json;

namespace detail {

template <class T>
T get_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::Malformed, std::string("missing key \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::Malformed, std::string("bad value for \"") + key + "\"");
  }
}

}  // namespace detail

inline Json field_to_json(const Field& f) {
  return {{"p", f.characteristic()}, {"d", f.degree()}, {"poly", f.modulus()}};
}

/// Rebuilds the field from (p, d); an echoed "poly" must match.
inline FieldPtr field_from_json(const Json& j, unsigned max_degree = kMaxSupportedDegree) {
  const auto p = detail::get_field<std::int64_t>(j, "p");
  const auto d = detail::get_field<std::int64_t>(j, "d");
  if (p < 2 || p > 0xffffffffLL || d < 1 || d > kMaxSupportedDegree) fail(ErrorKind::Malformed, "field header out of range");
  if (!detail::is_prime(static_cast<std::uint64_t>(p))) fail(ErrorKind::Malformed, "field characteristic is not prime");
  FieldPtr f;
  try {
    f = build_field(static_cast<std::uint32_t>(p), static_cast<unsigned>(d), max_degree);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ExtensionCap) throw;
    fail(ErrorKind::Malformed, e.what());
  }
  if (j.contains("poly") && detail::get_field<std::vector<std::int64_t>>(j, "poly") !=
                                std::vector<std::int64_t>(f->modulus().begin(), f->modulus().end()))
    fail(ErrorKind::Malformed, "defining polynomial does not match the deterministic choice for " + f->name());
  return f;
}

inline Json elem_to_json(const Field& f, Code a) {
  return {{"p", f.characteristic()}, {"d", f.degree()}, {"coeffs", f.coeffs(a)}};
}

inline Code elem_from_json(const Field& f, const Json& j) {
  if (detail::get_field<std::int64_t>(j, "p") != f.characteristic() ||
      detail::get_field<std::int64_t>(j, "d") != static_cast<std::int64_t>(f.degree()))
    fail(ErrorKind::Malformed, "element does not belong to " + f.name());
  const auto c = detail::get_field<std::vector<std::int64_t>>(j, "coeffs");
  if (c.size() != f.degree()) fail(ErrorKind::Malformed, "element needs " + std::to_string(f.degree()) + " coefficients");
  std::vector<std::uint32_t> u;
  for (auto x : c) {
    if (x < 0 || x >= static_cast<std::int64_t>(f.characteristic())) fail(ErrorKind::Malformed, "coefficient out of range");
    u.push_back(static_cast<std::uint32_t>(x));
  }
  return f.from_coeffs(u);
}

inline Json vec_to_json(const Field& f, const Vec& v) {
  Json out = Json::array();
  for (auto c : v) out.push_back(elem_to_json(f, c));
  return out;
}

inline Vec vec_from_json(const Field& f, const Json& j) {
  if (!j.is_array()) fail(ErrorKind::Malformed, "vector must be an array");
  Vec v;
  for (const auto& e : j) v.push_back(elem_from_json(f, e));
  return v;
}

inline Json matrix_to_json(const Matrix& m) {
  const Field& f = *m.field();
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(vec_to_json(f, m.row(i)));
  return {{"field", field_to_json(f)}, {"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(rows)}};
}

/// Parses a matrix; if `expected` is given the field header must match it.
inline Matrix matrix_from_json(const Json& j, const FieldPtr& expected = nullptr) {
  const FieldPtr f = field_from_json(detail::get_field<Json>(j, "field"));
  if (expected && !same_field(f, expected)) fail(ErrorKind::Malformed, "matrix field " + f->name() + " where " + expected->name() + " was expected");
  const auto r = detail::get_field<std::int64_t>(j, "rows");
  const auto c = detail::get_field<std::int64_t>(j, "cols");
  const auto& e = detail::get_field<Json>(j, "entries");
  if (r < 1 || c < 1 || !e.is_array() || e.size() != static_cast<std::size_t>(r))
    fail(ErrorKind::Malformed, "matrix entries do not match rows");
  Matrix m(f, static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const Vec row = vec_from_json(*f, e[i]);
    if (row.size() != m.cols()) fail(ErrorKind::Malformed, "matrix row " + std::to_string(i) + " has wrong length");
    for (std::size_t k = 0; k < m.cols(); ++k) m(i, k) = row[k];
  }
  return m;
}

inline Json label_to_json(const Label& l) {
  Json j{{"kind", label_name(l.kind)}};
  if (l.kind == LabelKind::Ws) j["s"] = l.s;
  return j;
}

inline Label label_from_json(const Json& j) {
  const auto kind = parse_label_kind(detail::get_field<std::string>(j, "kind"));
  if (!kind) fail(ErrorKind::Malformed, "unknown label kind");
  Label l{*kind, -1};
  if (*kind == LabelKind::Ws) {
    l.s = static_cast<int>(detail::get_field<std::int64_t>(j, "s"));
    if (l.s < 0) fail(ErrorKind::Malformed, "negative s");
  }
  return l;
}

inline Json certificate_to_json(const Certificate& c) {
  const Field& f = *c.field;
  Json trace = Json::array();
  for (const auto& st : c.trace) {
    Json params = Json::object();
    for (const auto& [k, v] : st.params.ints) params[k] = v;
    for (const auto& [k, v] : st.params.vectors) params[k] = vec_to_json(f, v);
    trace.push_back({{"name", st.name}, {"params", std::move(params)}, {"matrix", matrix_to_json(st.matrix)},
                     {"claimed", matrix_to_json(st.claimed)}});
  }
  Json j{{"input", matrix_to_json(c.input)},
         {"q", c.q},
         {"label", label_to_json(c.label)},
         {"T", matrix_to_json(c.t)},
         {"field", field_to_json(f)},
         {"input_embedding", elem_to_json(f, c.input_embedding)},
         {"trace", std::move(trace)}};
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  return j;
}

inline Certificate certificate_from_json(const Json& j) {
  Certificate c;
  c.field = field_from_json(detail::get_field<Json>(j, "field"));
  c.input = matrix_from_json(detail::get_field<Json>(j, "input"));
  const auto q = detail::get_field<std::int64_t>(j, "q");
  if (q < 2) fail(ErrorKind::Malformed, "q must be a prime power");
  c.q = static_cast<std::uint64_t>(q);
  c.label = label_from_json(detail::get_field<Json>(j, "label"));
  c.t = matrix_from_json(detail::get_field<Json>(j, "T"), c.field);
  c.input_embedding = elem_from_json(*c.field, detail::get_field<Json>(j, "input_embedding"));
  const auto& tr = detail::get_field<Json>(j, "trace");
  if (!tr.is_array()) fail(ErrorKind::Malformed, "trace must be an array");
  for (const auto& s : tr) {
    Step st;
    st.name = detail::get_field<std::string>(s, "name");
    const Json params = detail::get_field<Json>(s, "params");
    if (!params.is_object()) fail(ErrorKind::Malformed, "params must be an object");
    for (const auto& [k, v] : params.items()) {
      if (v.is_number_integer())
        st.params.ints[k] = v.get<std::int64_t>();
      else
        st.params.vectors[k] = vec_from_json(*c.field, v);
    }
    st.matrix = matrix_from_json(detail::get_field<Json>(s, "matrix"), c.field);
    st.claimed = matrix_from_json(detail::get_field<Json>(s, "claimed"), c.field);
    c.trace.push_back(std::move(st));
  }
  if (j.contains("seed") && !j.at("seed").is_null()) c.seed = detail::get_field<std::uint64_t>(j, "seed");
  return c;
}

inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Malformed, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace twistform

#endif  // TWISTFORM_JSON_IO_HPP
