// twistform: classify, normalize and verify q-twisted forms from the shell.
//
// Exit codes
//   0  success
//   1  invalid arguments or internal error
//   2  malformed input (bad JSON, wrong field header, out-of-range entries)
//   3  unsupported rank
//   4  extension degree cap exceeded
//   5  certificate failed verification
//   6  enumeration budget exceeded
//
// stdout carries JSON only; diagnostics go to stderr.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "twistform/twistform.hpp"

using namespace twistform;

namespace {

constexpr int kExitMalformed = 2;
constexpr int kExitRank = 3;
constexpr int kExitCap = 4;
constexpr int kExitVerify = 5;
constexpr int kExitBudget = 6;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Malformed:
    case ErrorKind::FieldMismatch: return kExitMalformed;
    case ErrorKind::RankMismatch: return kExitRank;
    case ErrorKind::ExtensionCap: return kExitCap;
    case ErrorKind::Budget: return kExitBudget;
    default: return 1;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Accepts a path or inline JSON text.
Json load_json(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) return parse_json(arg);
  return parse_json(read_file(arg));
}

void emit(const Json& j, const std::string& out) {
  const std::string text = j.dump() + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) fail(ErrorKind::InvalidArgument, "cannot write " + out);
  f << text;
}

unsigned resolve_cap(std::optional<unsigned> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("TWISTFORM_MAX_EXT")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0' || v == 0 || v > kMaxSupportedDegree)
      fail(ErrorKind::InvalidArgument, "TWISTFORM_MAX_EXT must be an integer in [1, 63]");
    return static_cast<unsigned>(v);
  }
  return kDefaultMaxDegree;
}

// q = p^e; returns p.
std::uint32_t prime_of(std::uint64_t q) {
  if (q < 2) fail(ErrorKind::InvalidArgument, "q must be a prime power");
  std::uint64_t p = 2;
  while (q % p != 0) ++p;
  std::uint64_t r = q;
  while (r % p == 0) r /= p;
  if (r != 1) fail(ErrorKind::InvalidArgument, std::to_string(q) + " is not a prime power");
  return static_cast<std::uint32_t>(p);
}

FieldPtr field_over_q(std::uint64_t q, unsigned j, unsigned cap) {
  const std::uint32_t p = prime_of(q);
  const unsigned e = twist_exponent(*build_field(p, 1), q);
  return build_field(p, e * j, cap);
}

Json point_list(const Field& f, const std::vector<Vec>& pts) {
  Json out = Json::array();
  for (const auto& x : pts) out.push_back(vec_to_json(f, x));
  return out;
}

std::optional<std::uint64_t> input_seed(const Json& j, std::optional<std::uint64_t> flag) {
  if (flag) return flag;
  if (j.is_object() && j.contains("seed") && j["seed"].is_number_unsigned()) return j["seed"].get<std::uint64_t>();
  return std::nullopt;
}

Json seed_json(std::optional<std::uint64_t> s) { return s ? Json(*s) : Json(nullptr); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classification of q-twisted forms over finite fields"};
  app.require_subcommand(1);

  std::uint64_t q = 0;
  std::string in, out;
  std::optional<unsigned> cap_flag;
  std::optional<std::uint64_t> seed;

  auto* classify_cmd = app.add_subcommand("classify", "Certificate for a corank <= 1 matrix (or a rank-1 plane curve)");
  classify_cmd->add_option("--q", q, "Twist q")->required();
  classify_cmd->add_option("--in", in, "Matrix JSON file or inline JSON")->required();
  classify_cmd->add_option("--out", out, "Write output here instead of stdout");
  classify_cmd->add_option("--max-ext-degree", cap_flag, "Extension degree cap");
  classify_cmd->add_option("--seed", seed, "Seed to record in the certificate");

  auto* normalize_cmd = app.add_subcommand("normalize", "Full-rank witness tA A T^(q) = I");
  normalize_cmd->add_option("--q", q, "Twist q")->required();
  normalize_cmd->add_option("--in", in, "Matrix JSON file or inline JSON")->required();
  normalize_cmd->add_option("--out", out, "Write output here instead of stdout");
  normalize_cmd->add_option("--max-ext-degree", cap_flag, "Extension degree cap");
  normalize_cmd->add_option("--seed", seed, "Seed to record");

  std::string cert_path;
  auto* verify_cmd = app.add_subcommand("verify", "Replay a certificate");
  verify_cmd->add_option("certificate", cert_path, "Certificate JSON file or inline JSON")->required();

  std::size_t n = 0, s = 0, rank_arg = 0;
  unsigned field_degree = 1, m = 1;
  bool list_points = false;
  auto* points_cmd = app.add_subcommand("points", "Points of X_s over F_{q^j}");
  points_cmd->add_option("--q", q, "Twist q")->required();
  points_cmd->add_option("--n", n, "Projective dimension")->required();
  points_cmd->add_option("--s", s, "Normal form index")->required();
  points_cmd->add_option("--field-degree", field_degree, "Count over F_{q^j} for j = 1..field-degree");
  points_cmd->add_option("--seed", seed, "Seed to record");
  points_cmd->add_flag("--list", list_points, "Also list the points over the largest field");

  std::string matrix_path;
  auto* aut_cmd = app.add_subcommand("aut", "Automorphism conditions for a matrix on X_s");
  aut_cmd->add_option("--q", q, "Twist q")->required();
  aut_cmd->add_option("--n", n, "Projective dimension")->required();
  aut_cmd->add_option("--s", s, "Normal form index")->required();
  aut_cmd->add_option("--matrix", matrix_path, "Matrix JSON file or inline JSON")->required();
  aut_cmd->add_option("--seed", seed, "Seed to record");

  auto* orbits_cmd = app.add_subcommand("orbits", "Brute-force orbits of matrices of a given rank");
  orbits_cmd->add_option("--q", q, "Twist q")->required();
  orbits_cmd->add_option("--n", n, "Projective dimension")->required();
  orbits_cmd->add_option("--m", m, "Base field F_{q^m}");
  orbits_cmd->add_option("--rank", rank_arg, "Rank of the enumerated matrices")->required();
  orbits_cmd->add_option("--seed", seed, "Seed to record");

  auto* random_cmd = app.add_subcommand("random", "Seeded random matrix of prescribed rank over F_{q^m}");
  random_cmd->add_option("--q", q, "Twist q")->required();
  random_cmd->add_option("--n", n, "Projective dimension (matrix size n+1)")->required();
  random_cmd->add_option("--m", m, "Field F_{q^m}");
  random_cmd->add_option("--rank", rank_arg, "Rank")->required();
  random_cmd->add_option("--seed", seed, "Seed")->required();
  random_cmd->add_option("--out", out, "Write output here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const unsigned cap = resolve_cap(cap_flag);

    if (*classify_cmd || *normalize_cmd) {
      const Json j = load_json(in);
      const Matrix a = matrix_from_json(j);
      if (!a.square() || a.rows() < 2) fail(ErrorKind::Malformed, "input must be a square matrix of size at least 2");
      twist_exponent(*a.field(), q);
      if (*classify_cmd) {
        Certificate c = classify(a, q, cap);
        c.seed = input_seed(j, seed);
        emit(certificate_to_json(c), out);
      } else {
        const auto w = normalize_full_rank(a, q, cap);
        const Field& f = *w.field;
        emit({{"input", matrix_to_json(a)},
              {"q", q},
              {"field", field_to_json(f)},
              {"input_embedding", elem_to_json(f, w.embedding.generator_image())},
              {"T", matrix_to_json(w.t)},
              {"T1", matrix_to_json(w.t1)},
              {"T2", matrix_to_json(w.t2)},
              {"T3", matrix_to_json(w.t3)},
              {"hermitian", matrix_to_json(w.hermitian)},
              {"diagonal", matrix_to_json(w.diagonal)},
              {"seed", seed_json(input_seed(j, seed))}},
             out);
      }
      return 0;
    }

    if (*verify_cmd) {
      const Certificate c = certificate_from_json(load_json(cert_path));
      const VerifyResult r = verify_certificate(c);
      Json j{{"ok", r.ok}, {"seed", seed_json(c.seed)}};
      if (!r.ok) {
        j["failed_step"] = *r.failed_step;
        j["reason"] = r.reason;
        std::cerr << "verification failed at step " << *r.failed_step << ": " << r.reason << "\n";
      }
      emit(j, "");
      return r.ok ? 0 : kExitVerify;
    }

    if (*points_cmd) {
      if (s > n || n < 1) fail(ErrorKind::InvalidArgument, "need 1 <= n and s <= n");
      if (field_degree < 1) fail(ErrorKind::InvalidArgument, "field degree must be at least 1");
      Json counts = Json::array();
      FieldPtr f;
      for (unsigned jj = 1; jj <= field_degree; ++jj) {
        f = field_over_q(q, jj, cap);
        const Matrix w = w_matrix(f, n, s);
        counts.push_back({{"field", field_to_json(*f)}, {"j", jj}, {"count", count_points(w, q, f)}});
      }
      const Matrix w = w_matrix(f, n, s);
      Json j{{"n", n}, {"s", s}, {"q", q}, {"counts", std::move(counts)},
             {"singular", point_list(*f, singular_points(w, q, f))}, {"seed", seed_json(seed)}};
      if (list_points) j["points"] = point_list(*f, enum_points(w, q, f));
      emit(j, "");
      return 0;
    }

    if (*aut_cmd) {
      const Matrix mm = matrix_from_json(load_json(matrix_path));
      twist_exponent(*mm.field(), q);
      if (!is_invertible(mm)) fail(ErrorKind::InvalidArgument, "automorphism candidate is singular");
      const Field& f = *mm.field();
      const auto delta = aut_membership(mm, s, n, q);
      const AutReport rep = aut_structural_check(mm, s, n, q);
      auto conds = [](const std::vector<std::pair<std::string, bool>>& v) {
        Json o = Json::array();
        for (const auto& [name, ok] : v) o.push_back({{"condition", name}, {"holds", ok}});
        return o;
      };
      emit({{"M", matrix_to_json(mm)},
            {"n", n},
            {"s", s},
            {"q", q},
            {"member", delta.has_value()},
            {"delta", delta ? elem_to_json(f, *delta) : Json(nullptr)},
            {"structural", rep.holds},
            {"regime", rep.regime},
            {"reason", rep.reason},
            {"equations", conds(rep.equations)},
            {"literal_conditions", conds(rep.conditions)},
            {"literal_holds", literal_conditions_hold(rep)},
            {"seed", seed_json(seed)}},
           "");
      return 0;
    }

    if (*orbits_cmd) {
      const OrbitReport rep = brute_force_orbits(n, q, m, rank_arg);
      Json levels = Json::array();
      for (const auto& l : rep.levels)
        levels.push_back({{"degree", l.degree}, {"group_order", l.group_order}, {"w_orbit_sizes", l.w_orbit_sizes},
                          {"separated", l.separated}});
      Json entries = Json::array();
      for (const auto& e : rep.entries)
        entries.push_back({{"matrix", matrix_to_json(e.a)},
                           {"orbit_s", e.orbit_s ? Json(*e.orbit_s) : Json(nullptr)},
                           {"found_at_degree", e.found_at_degree},
                           {"pipeline_s", e.pipeline_s ? Json(*e.pipeline_s) : Json(nullptr)},
                           {"base_class", e.base_class}});
      emit({{"n", rep.n}, {"q", rep.q}, {"m", rep.m}, {"rank", rep.rank}, {"levels", std::move(levels)},
            {"base_classes", rep.base_classes}, {"separated", rep.separated}, {"labels_agree", rep.labels_agree},
            {"unresolved", rep.unresolved},
            {"entries", std::move(entries)}, {"seed", seed_json(seed)}},
           "");
      return 0;
    }

    if (*random_cmd) {
      if (m < 1) fail(ErrorKind::InvalidArgument, "m must be at least 1");
      const FieldPtr f = field_over_q(q, m, cap);
      if (rank_arg > n + 1) fail(ErrorKind::RankMismatch, "rank " + std::to_string(rank_arg) + " impossible for size " + std::to_string(n + 1));
      std::mt19937_64 rng(*seed);
      Json j = matrix_to_json(random_rank_matrix(f, n + 1, rank_arg, rng));
      j["seed"] = *seed;
      emit(j, out);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "twistform: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "twistform: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
