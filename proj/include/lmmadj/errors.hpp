#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lmmadj {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration: unknown scheme names, inconsistent sizes,
/// violated setup conditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical solve failed. Carries the time-step index where it happened
/// and, for implicit solves, the final residual and iteration count.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::ptrdiff_t step, double residual = 0.0,
              int iterations = 0)
      : Error(what), step_(step), residual_(residual), iterations_(iterations) {}

  [[nodiscard]] std::ptrdiff_t step() const noexcept { return step_; }
  [[nodiscard]] double residual() const noexcept { return residual_; }
  [[nodiscard]] int iterations() const noexcept { return iterations_; }

 private:
  std::ptrdiff_t step_;
  double residual_;
  int iterations_;
};

/// A model was evaluated outside its domain (e.g. non-positive density).
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace lmmadj
