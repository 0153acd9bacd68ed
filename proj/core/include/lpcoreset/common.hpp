#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lpcoreset {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown on invalid parameters (p, epsilon, delta, window sizes, ...).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown on non-finite or dimensionally inconsistent numeric input.
class InvalidInputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an iterative solver fails to reach its residual target.
/// Carries the last residual so callers can report or retry.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_ = 0.0;
};

/// Thrown when a requested object (e.g. a Khatri-Rao power) exceeds the
/// configured size cap.
class CapacityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown on file-format and filesystem problems.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }
inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Number of worker threads for parallel sections. Reads LPCORESET_THREADS,
/// defaults to 1 (parallelism is opt-in; all reductions are fixed-order).
int worker_threads();

}  // namespace lpcoreset
