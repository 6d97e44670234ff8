#pragma once

#include <stdexcept>
#include <string>

namespace dosskit {

/// Error category. The numeric values double as the CLI exit codes.
enum class ErrorKind : int {
  io = 1,
  validation = 2,
  computation = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error io_error(const std::string& what) {
  return Error(ErrorKind::io, what);
}
inline Error validation_error(const std::string& what) {
  return Error(ErrorKind::validation, what);
}
inline Error computation_error(const std::string& what) {
  return Error(ErrorKind::computation, what);
}

}  // namespace dosskit
