#include "homogmem/error.hpp"

namespace homogmem {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::geometry: return "geometry-error";
    case Errc::periodicity: return "periodicity-error";
    case Errc::format: return "format-error";
    case Errc::convergence: return "convergence-error";
    case Errc::io: return "io-error";
  }
  return "unknown-error";
}

}  // namespace homogmem
