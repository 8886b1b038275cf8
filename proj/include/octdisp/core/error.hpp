#pragma once

#include <stdexcept>
#include <string>

namespace octdisp {

/// Error categories. The CLI maps each to a distinct exit code.
enum class ErrorKind {
  invalid_argument,  // bad parameter value or dimension mismatch
  domain,            // numerically ill-posed input (all-zero image, empty region)
  format,            // malformed OctBin or manifest
  io,                // filesystem failure
  schema,            // config document violates its schema
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::domain: return "domain";
    case ErrorKind::format: return "format";
    case ErrorKind::io: return "io";
    case ErrorKind::schema: return "schema";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what, ErrorKind kind = ErrorKind::invalid_argument) {
  if (!condition) fail(kind, what);
}

}  // namespace octdisp
