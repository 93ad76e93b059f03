#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mwalk/quantize.hpp"

namespace mwalk {

/// Raised for invalid user-facing configuration (unknown names, out-of-range
/// parameters, missing targets). Always thrown before any evaluation.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Point = std::vector<double>;
using ObjectiveFn = std::function<double(std::span<const double>)>;

/// Number of objective evaluations (probes) charged to one run.
struct EvalCounter {
  std::uint64_t probes = 0;
};

enum class Landscape { continuous, integer_staircase };

struct ObjectiveSpec {
  std::string name;
  std::size_t dim = 0;
  Point lower;
  Point upper;
  /// Stored already quantized to `digits_target`.
  std::optional<double> value_target;
  int digits_target = 9;
  /// Carried as metadata only; success is quantized-target equality.
  double of_tol = 5e-4;
  std::vector<Point> target_coords;
  Landscape landscape = Landscape::continuous;
  /// Set when the objective is the coordinate mean of a registered 1-D
  /// objective, so its minimum can be located on that factor.
  std::string separable_factor;
  /// Number of states for integer staircases (0 otherwise).
  std::uint64_t states = 0;
  ObjectiveFn fn;

  bool has_target() const { return value_target.has_value(); }
};

/// Raw objective value at `x`; charges one probe.
inline double evaluate(const ObjectiveSpec& spec, std::span<const double> x,
                       EvalCounter& counter) {
  assert(x.size() == spec.dim);
  ++counter.probes;
  return spec.fn(x);
}

/// Copy of `spec` carrying a target quantized to `digits`.
inline ObjectiveSpec with_target(ObjectiveSpec spec, double value, int digits,
                                 std::vector<Point> coords = {}) {
  if (digits < 1) throw config_error("digitsTarget must be >= 1");
  spec.digits_target = digits;
  spec.value_target = quantize(value, digits);
  spec.target_coords = std::move(coords);
  return spec;
}

// ---------------------------------------------------------------------------
// Test functions

/// One-dimensional wild function term.
inline double wild_term(double t) {
  const double t2 = t * t;
  return 10.0 * std::sin(0.3 * t) * std::sin(1.3 * t2) + 1.0e-5 * t2 * t2 +
         0.2 * t + 80.0;
}

/// Mean of the wild term over the coordinates.
inline double wild(std::span<const double> x) {
  double sum = 0.0;
  for (double t : x) sum += wild_term(t);
  return sum / static_cast<double>(x.size());
}

/// The two-variable Trefethen function (angles in radians).
inline double trefethen_g(double a, double b) {
  return std::exp(std::sin(50.0 * a)) + std::sin(60.0 * std::exp(b)) +
         std::sin(70.0 * std::sin(a)) + std::sin(std::sin(80.0 * b)) -
         std::sin(10.0 * (a + b)) + 0.25 * (a * a + b * b);
}

/// g(x,0) for p=1, g(x,y) for p=2, g(x,y)+g(y,z) for p=3.
inline double trefethen(std::span<const double> x) {
  switch (x.size()) {
    case 1:
      return trefethen_g(x[0], 0.0);
    case 2:
      return trefethen_g(x[0], x[1]);
    case 3:
      return trefethen_g(x[0], x[1]) + trefethen_g(x[1], x[2]);
    default:
      assert(false && "trefethen is defined for p = 1, 2, 3");
      return std::numeric_limits<double>::quiet_NaN();
  }
}

inline double ln_binomial(std::uint64_t n, std::uint64_t k) {
  k = std::min(k, n - k);
  if (k == 0) return 0.0;
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

inline constexpr int kEhrenfestMaxOrder = 60;
inline constexpr double kEhrenfestParity = 0.01;

/// Staircase surrogate on [1, 2^n + 1]: state k = round(x) - 1 scores
/// -ln C(2^n, k), scaled up 1% on even k and down 1% on odd k.
inline double ehrenfest_surrogate(double x, int order) {
  if (std::isnan(x)) return x;
  const std::uint64_t states = std::uint64_t{1} << order;  // N
  const double r = std::round(x) - 1.0;
  std::uint64_t k = 0;
  if (r >= static_cast<double>(states))
    k = states;
  else if (r > 0.0)
    k = static_cast<std::uint64_t>(r);
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return -ln_binomial(states, k) * (1.0 + kEhrenfestParity * sign);
}

// ---------------------------------------------------------------------------
// Registry

inline ObjectiveSpec make_ehrenfest(int order) {
  if (order < 1 || order > kEhrenfestMaxOrder)
    throw config_error("ehrenfest order must be in [1, 60], got " +
                       std::to_string(order));
  ObjectiveSpec spec;
  spec.name = "ehrenfest" + std::to_string(order);
  spec.dim = 1;
  spec.states = (std::uint64_t{1} << order) + 1;
  spec.lower = {1.0};
  spec.upper = {static_cast<double>(spec.states)};
  spec.landscape = Landscape::integer_staircase;
  spec.fn = [order](std::span<const double> x) {
    return ehrenfest_surrogate(x[0], order);
  };
  return spec;
}

inline ObjectiveSpec make_wild(std::size_t p) {
  ObjectiveSpec spec;
  spec.name = "wild" + std::to_string(p);
  spec.dim = p;
  spec.lower.assign(p, -50.0);
  spec.upper.assign(p, 50.0);
  if (p > 1) spec.separable_factor = "wild1";
  spec.fn = [](std::span<const double> x) { return wild(x); };
  return spec;
}

inline ObjectiveSpec make_trefethen(std::size_t p) {
  ObjectiveSpec spec;
  spec.name = "trefethen" + std::to_string(p);
  spec.dim = p;
  spec.lower.assign(p, -1.0);
  spec.upper.assign(p, 1.0);
  spec.fn = [](std::span<const double> x) { return trefethen(x); };
  return spec;
}

inline const std::vector<std::string>& objective_names() {
  static const std::vector<std::string> names = {
      "ehrenfest4", "ehrenfest15", "wild1",      "wild2",
      "wild3",      "trefethen1",  "trefethen2", "trefethen3"};
  return names;
}

/// Registry lookup by name. The returned spec carries no target; targets
/// come from the oracle's target store.
inline ObjectiveSpec make_objective(std::string_view name) {
  if (name == "ehrenfest4") return make_ehrenfest(4);
  if (name == "ehrenfest15") return make_ehrenfest(15);
  for (std::size_t p = 1; p <= 3; ++p) {
    if (name == "wild" + std::to_string(p)) return make_wild(p);
    if (name == "trefethen" + std::to_string(p)) return make_trefethen(p);
  }
  throw config_error("unknown objective '" + std::string(name) + "'");
}

}  // namespace mwalk
