#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "lmmadj/errors.hpp"

namespace lmmadj::lmm {

using Rational = boost::rational<long long>;

enum class SchemeClass { Bdf, AdamsBashforth, AdamsMoulton };

/// Denominator used for the AM(4) corrector weights (251, 646, -264, 106, -19).
/// 720 is the classical 4-step Adams-Moulton scheme; 270 reproduces a
/// printed variant whose weights do not sum to one.
enum class AmDenominator { k720 = 720, k270 = 270 };

/// Multistep coefficients in exact arithmetic. Compare only against Rational
/// values: mixed rational/int comparisons recurse under C++20 rewriting.
///
/// The recurrence is
///   y_{n+1} = -sum_{l=0}^{s-1} a_l y_{n-l} + dt * sum_{l=-1}^{s-1} b_l f_{n-l},
/// with `b[0]` holding b_{-1} (the implicit weight) and `b[l+1]` holding b_l.
struct RationalTableau {
  std::string name;
  std::vector<Rational> a;  // size s
  std::vector<Rational> b;  // size s + 1
  int nominal_order = 1;
  SchemeClass scheme_class = SchemeClass::Bdf;

  [[nodiscard]] std::size_t stages() const noexcept { return a.size(); }

  [[nodiscard]] Rational consistency_defect() const {
    Rational sum{1};
    for (const auto& ai : a) sum += ai;
    return sum;
  }

  [[nodiscard]] bool implicit() const { return b.front() != Rational(0); }

  [[nodiscard]] bool bdf_form() const {
    return b.front() != Rational(0) &&
           std::all_of(b.begin() + 1, b.end(), [](const Rational& r) { return r == Rational(0); });
  }

  [[nodiscard]] bool adams_form() const {
    return a.front() == Rational(-1) &&
           std::all_of(a.begin() + 1, a.end(), [](const Rational& r) { return r == Rational(0); });
  }
};

/// Floating-point view of a tableau, converted once from the exact form.
template <class Scalar>
class MultistepTableau {
 public:
  explicit MultistepTableau(RationalTableau exact) : exact_(std::move(exact)) {
    if (exact_.a.empty() || exact_.b.size() != exact_.a.size() + 1) {
      throw ConfigError("tableau '" + exact_.name + "': expected |b| = |a| + 1");
    }
    a_.reserve(exact_.a.size());
    b_.reserve(exact_.b.size());
    for (const auto& r : exact_.a) a_.push_back(to_scalar(r));
    for (const auto& r : exact_.b) b_.push_back(to_scalar(r));
  }

  [[nodiscard]] const std::string& name() const noexcept { return exact_.name; }
  [[nodiscard]] std::size_t stages() const noexcept { return a_.size(); }
  [[nodiscard]] int nominal_order() const noexcept { return exact_.nominal_order; }
  [[nodiscard]] SchemeClass scheme_class() const noexcept { return exact_.scheme_class; }
  [[nodiscard]] const RationalTableau& exact() const noexcept { return exact_; }

  /// a_l for l = 0..s-1.
  [[nodiscard]] Scalar a(std::size_t l) const { return a_[l]; }
  /// b_l for l = -1..s-1.
  [[nodiscard]] Scalar b(int l) const { return b_[static_cast<std::size_t>(l + 1)]; }
  [[nodiscard]] Scalar b_implicit() const { return b_.front(); }

  [[nodiscard]] bool is_bdf() const { return exact_.bdf_form(); }
  [[nodiscard]] bool is_explicit() const { return !exact_.implicit(); }
  [[nodiscard]] bool is_adams() const { return exact_.adams_form(); }

 private:
  static Scalar to_scalar(const Rational& r) {
    return static_cast<Scalar>(r.numerator()) / static_cast<Scalar>(r.denominator());
  }

  RationalTableau exact_;
  std::vector<Scalar> a_;
  std::vector<Scalar> b_;
};

namespace detail {

inline std::string normalize_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (c == '(' || c == ')' || c == '-' || c == '_' || c == ' ') continue;
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

inline std::vector<Rational> over(std::initializer_list<long long> nums, long long den) {
  std::vector<Rational> v;
  for (long long n : nums) v.emplace_back(n, den);
  return v;
}

}  // namespace detail

/// Names accepted by `rational_tableau`, in canonical spelling.
inline const std::array<std::string_view, 10>& tableau_names() {
  static const std::array<std::string_view, 10> names{
      "ImplicitEuler", "ExplicitEuler", "BDF2", "BDF3", "BDF4",
      "BDF5",          "BDF6",          "AB2",  "AB3",  "AM4"};
  return names;
}

inline RationalTableau rational_tableau(std::string_view name,
                                        AmDenominator am_den = AmDenominator::k720) {
  using detail::over;
  const std::string key = detail::normalize_name(name);
  if (key == "IMPLICITEULER" || key == "BDF1") {
    return {"ImplicitEuler", over({-1}, 1), over({1, 0}, 1), 1, SchemeClass::Bdf};
  }
  if (key == "EXPLICITEULER" || key == "AB1") {
    return {"ExplicitEuler", over({-1}, 1), over({0, 1}, 1), 1, SchemeClass::AdamsBashforth};
  }
  if (key == "BDF2") {
    return {"BDF2", over({-4, 1}, 3), over({2, 0, 0}, 3), 2, SchemeClass::Bdf};
  }
  if (key == "BDF3") {
    return {"BDF3", over({-18, 9, -2}, 11), over({6, 0, 0, 0}, 11), 3, SchemeClass::Bdf};
  }
  if (key == "BDF4") {
    return {"BDF4", over({-48, 36, -16, 3}, 25), over({12, 0, 0, 0, 0}, 25), 4,
            SchemeClass::Bdf};
  }
  if (key == "BDF5") {
    return {"BDF5", over({-300, 300, -200, 75, -12}, 137), over({60, 0, 0, 0, 0, 0}, 137), 5,
            SchemeClass::Bdf};
  }
  if (key == "BDF6") {
    return {"BDF6", over({-360, 450, -400, 225, -72, 10}, 147),
            over({60, 0, 0, 0, 0, 0, 0}, 147), 6, SchemeClass::Bdf};
  }
  if (key == "AB2") {
    return {"AB2", over({-1, 0}, 1), over({0, 3, -1}, 2), 2, SchemeClass::AdamsBashforth};
  }
  if (key == "AB3") {
    return {"AB3", over({-1, 0, 0}, 1), over({0, 23, -16, 5}, 12), 3,
            SchemeClass::AdamsBashforth};
  }
  if (key == "AM4") {
    return {"AM4", over({-1, 0, 0, 0}, 1),
            over({251, 646, -264, 106, -19}, static_cast<long long>(am_den)), 5,
            SchemeClass::AdamsMoulton};
  }
  throw ConfigError("unknown multistep scheme '" + std::string(name) + "'");
}

template <class Scalar = double>
MultistepTableau<Scalar> tableau(std::string_view name,
                                 AmDenominator am_den = AmDenominator::k720) {
  return MultistepTableau<Scalar>(rational_tableau(name, am_den));
}

}  // namespace lmmadj::lmm
