#pragma once

#include <stdexcept>
#include <string>

namespace nlvc {

enum class ErrorCode {
  Config = 1,
  Domain,
  Quadrature,
  Assembly,
  Numeric,
  Lookup,
};

/// Base class for all library failures; `code()` maps onto the C API status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorCode::Config, what) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorCode::Domain, what) {}
};
struct QuadratureError : Error {
  explicit QuadratureError(const std::string& what) : Error(ErrorCode::Quadrature, what) {}
};
struct AssemblyError : Error {
  explicit AssemblyError(const std::string& what) : Error(ErrorCode::Assembly, what) {}
};

/// Solver breakdown or non-convergence; carries the last residual seen.
struct NumericError : Error {
  NumericError(const std::string& what, double residual)
      : Error(ErrorCode::Numeric, what), residual(residual) {}
  double residual;
};

struct LookupError : Error {
  explicit LookupError(const std::string& what) : Error(ErrorCode::Lookup, what) {}
};

}  // namespace nlvc
