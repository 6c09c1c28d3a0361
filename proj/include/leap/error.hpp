#pragma once

#include <stdexcept>
#include <string>

namespace leap {

enum class ErrorKind { validation, numerical, io };

/// Exception carrying a coarse category; the CLI maps it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error validation_error(const std::string& what) {
  return Error(ErrorKind::validation, what);
}
inline Error numerical_error(const std::string& what) {
  return Error(ErrorKind::numerical, what);
}
inline Error io_error(const std::string& what) {
  return Error(ErrorKind::io, what);
}

}  // namespace leap
