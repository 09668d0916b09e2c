#pragma once

#include <stdexcept>
#include <string>

namespace bakelabel {

enum class ErrorKind {
  parse,        // malformed syntax
  schema,       // missing or mistyped field
  integrity,    // dangling reference, duplicate key
  validation,   // value outside its domain
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse error";
    case ErrorKind::schema: return "schema error";
    case ErrorKind::integrity: return "integrity error";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::io: return "I/O error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace bakelabel
