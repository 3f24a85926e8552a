#pragma once

#include <cstddef>
#include <string>

#include "lmmadj/errors.hpp"

namespace lmmadj::lmm {

/// Uniform grid t_n = t0 + n * dt, n = 0..N, with dt = (T - t0) / N.
/// Negative n addresses the pre-initial stages of a multistep history.
template <class Scalar>
class TimeGrid {
 public:
  TimeGrid(Scalar t0, Scalar t_final, std::size_t steps)
      : t0_(t0), t_final_(t_final), steps_(steps) {
    if (!(t_final > t0)) throw ConfigError("time grid: need T > t0");
    if (steps == 0) throw ConfigError("time grid: need at least one step");
    dt_ = (t_final - t0) / static_cast<Scalar>(steps);
  }

  [[nodiscard]] Scalar t0() const noexcept { return t0_; }
  [[nodiscard]] Scalar t_final() const noexcept { return t_final_; }
  [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
  [[nodiscard]] Scalar dt() const noexcept { return dt_; }

  [[nodiscard]] Scalar time(std::ptrdiff_t n) const noexcept {
    return t0_ + static_cast<Scalar>(n) * dt_;
  }

 private:
  Scalar t0_;
  Scalar t_final_;
  std::size_t steps_;
  Scalar dt_;
};

}  // namespace lmmadj::lmm
