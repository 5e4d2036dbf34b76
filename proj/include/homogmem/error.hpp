#pragma once

#include <stdexcept>
#include <string>

namespace homogmem {

/// Failure categories shared by every module. The C API maps these one-to-one
/// onto its status codes.
enum class Errc {
  invalid_argument,
  geometry,
  periodicity,
  format,
  convergence,
  io,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by iterative solvers; carries the last relative residual reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, double residual)
      : Error(Errc::convergence, message), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, Errc code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace homogmem
