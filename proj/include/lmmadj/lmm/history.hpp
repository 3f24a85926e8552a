#pragma once

#include <cstddef>
#include <vector>

#include "lmmadj/errors.hpp"

namespace lmmadj::lmm {

/// Ring buffer of the s most recent states y_n, ..., y_{n-s+1} together with
/// their right-hand-side values. Index 0 is the newest entry.
template <class Scalar>
class History {
 public:
  explicit History(std::size_t depth) : states_(depth), rhs_(depth) {
    if (depth == 0) throw ConfigError("history depth must be positive");
  }

  void push(Scalar y, Scalar f) {
    head_ = (head_ + 1) % depth();
    states_[head_] = y;
    rhs_[head_] = f;
    if (size_ < depth()) ++size_;
  }

  [[nodiscard]] std::size_t depth() const noexcept { return states_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] bool warm() const noexcept { return size_ == depth(); }

  /// y_{n-k}
  [[nodiscard]] Scalar state(std::size_t k) const { return states_[slot(k)]; }
  /// f(y_{n-k})
  [[nodiscard]] Scalar rhs(std::size_t k) const { return rhs_[slot(k)]; }

 private:
  [[nodiscard]] std::size_t slot(std::size_t k) const {
    return (head_ + depth() - k % depth()) % depth();
  }

  std::vector<Scalar> states_;
  std::vector<Scalar> rhs_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

}  // namespace lmmadj::lmm
