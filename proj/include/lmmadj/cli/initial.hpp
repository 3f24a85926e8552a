#pragma once

#include <cmath>
#include <cstddef>
#include <exception>
#include <string>
#include <vector>

#include "lmmadj/errors.hpp"
#include "lmmadj/relax/grid.hpp"
#include "lmmadj/relax/solver.hpp"

namespace lmmadj::cli {

/// Named initial profile with numeric arguments, written `name(a, b, ...)`.
///   gaussian(amp, centre, width)   amp exp(-((x - centre)/width)^2)
///   step(value, lo, hi)            value on [lo, hi], 0 elsewhere
///   ramp(lo, hi)                   x - lo on [lo, hi], 0 elsewhere
///   constant(value)
///   rest(rho)                      rho, m = 0                      (two components)
///   sine-momentum(lo, hi, rho)     rho, m = sin(pi x) on [lo, hi]  (two components)
struct ProfileSpec {
  std::string name;
  std::vector<double> args;

  static ProfileSpec parse(const std::string& text, const std::string& where) {
    ProfileSpec p;
    const auto open = text.find('(');
    if (open == std::string::npos) {
      p.name = text;
    } else {
      if (text.back() != ')') throw ConfigError(where + ": missing ')' in '" + text + "'");
      p.name = text.substr(0, open);
      std::string inner = text.substr(open + 1, text.size() - open - 2);
      std::size_t pos = 0;
      while (pos <= inner.size()) {
        const auto comma = inner.find(',', pos);
        const std::string item =
            inner.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (item.find_first_not_of(" \t") != std::string::npos) {
          std::size_t used = 0;
          double v = 0.0;
          try {
            v = std::stod(item, &used);
          } catch (const std::exception&) {
            throw ConfigError(where + ": bad number '" + item + "'");
          }
          if (item.find_first_not_of(" \t", used) != std::string::npos) {
            throw ConfigError(where + ": bad number '" + item + "'");
          }
          p.args.push_back(v);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    }
    const auto b = p.name.find_first_not_of(" \t");
    const auto e = p.name.find_last_not_of(" \t");
    p.name = b == std::string::npos ? std::string() : p.name.substr(b, e - b + 1);
    const std::size_t need = p.arity(where);
    if (p.args.size() != need) {
      throw ConfigError(where + ": profile '" + p.name + "' takes " + std::to_string(need) +
                        " arguments, got " + std::to_string(p.args.size()));
    }
    return p;
  }

  [[nodiscard]] std::size_t arity(const std::string& where) const {
    if (name == "gaussian" || name == "step" || name == "sine-momentum") return 3;
    if (name == "ramp") return 2;
    if (name == "constant" || name == "rest") return 1;
    throw ConfigError(where + ": unknown profile '" + name +
                      "' (gaussian, step, ramp, constant, rest, sine-momentum)");
  }

  [[nodiscard]] std::size_t components() const {
    return name == "rest" || name == "sine-momentum" ? 2 : 1;
  }

  /// Value of each component at x.
  [[nodiscard]] std::vector<double> at(double x) const {
    constexpr double tol = 1e-12;
    auto inside = [&](double lo, double hi) { return x >= lo - tol && x <= hi + tol; };
    if (name == "gaussian") {
      const double d = (x - args[1]) / args[2];
      return {args[0] * std::exp(-d * d)};
    }
    if (name == "step") return {inside(args[1], args[2]) ? args[0] : 0.0};
    if (name == "ramp") return {inside(args[0], args[1]) ? x - args[0] : 0.0};
    if (name == "constant") return {args[0]};
    if (name == "rest") return {args[0], 0.0};
    // sine-momentum
    return {args[2], inside(args[0], args[1]) ? std::sin(M_PI * x) : 0.0};
  }

  [[nodiscard]] relax::Macro sample(const relax::LagrangianGrid& grid) const {
    relax::Macro u(components(), std::vector<double>(grid.points()));
    for (std::size_t i = 0; i < grid.points(); ++i) {
      const auto v = at(grid.x(i));
      for (std::size_t r = 0; r < v.size(); ++r) u[r][i] = v[r];
    }
    return u;
  }
};

}  // namespace lmmadj::cli
