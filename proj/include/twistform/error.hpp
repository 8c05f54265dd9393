#ifndef TWISTFORM_ERROR_HPP
#define TWISTFORM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace twistform {

enum class ErrorKind {
  InvalidArgument,
  Malformed,
  DivisionByZero,
  FieldMismatch,
  SingularMatrix,
  RankMismatch,
  ExtensionCap,
  Budget,
  ShapeMismatch,
  Internal,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::Malformed: return "malformed input";
    case ErrorKind::DivisionByZero: return "division by zero";
    case ErrorKind::FieldMismatch: return "field mismatch";
    case ErrorKind::SingularMatrix: return "singular matrix";
    case ErrorKind::RankMismatch: return "rank mismatch";
    case ErrorKind::ExtensionCap: return "extension cap exceeded";
    case ErrorKind::Budget: return "enumeration budget exceeded";
    case ErrorKind::ShapeMismatch: return "shape mismatch";
    case ErrorKind::Internal: return "internal invariant violated";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace twistform

#endif  // TWISTFORM_ERROR_HPP
