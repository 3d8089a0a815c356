#pragma once

#include <stdexcept>
#include <string>

namespace nlmc {

// Numeric values double as CLI exit codes.
enum class ErrorKind {
  validation = 2,
  non_convergence = 3,
  precondition = 4,
  solver = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::validation, what) {}
};

struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& what)
      : Error(ErrorKind::non_convergence, what) {}
};

struct PreconditionError : Error {
  explicit PreconditionError(const std::string& what)
      : Error(ErrorKind::precondition, what) {}
};

struct SolverError : Error {
  explicit SolverError(const std::string& what)
      : Error(ErrorKind::solver, what) {}
};

inline int exit_code(ErrorKind kind) { return static_cast<int>(kind); }

}  // namespace nlmc
