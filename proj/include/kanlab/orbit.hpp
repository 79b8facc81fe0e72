#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "kanlab/skew.hpp"

namespace kanlab {

/// Where a base orbit starts: a floating angle, or an exact rational
/// (linear base maps only; the orbit is then computed in integers).
using BaseSeed = std::variant<double, RationalAngle>;

double seed_value(const BaseSeed& seed);

/// Streams the coupling coefficients e_n = epsilon*C(E^n theta) of a base
/// orbit. Exact rational seeds are iterated in integers, so periodic orbits
/// stay periodic for any length.
class CouplingStream {
 public:
  CouplingStream(const skew::KanSystem& sys, const BaseSeed& seed);

  /// Appends the next out.size() coefficients.
  void fill(std::span<double> out);
  std::vector<double> take(std::size_t count);
  /// Angle of the next orbit point.
  double current_angle() const;
  /// The next orbit point in the seed's own representation.
  BaseSeed current() const;

 private:
  const skew::KanSystem* sys_;
  bool exact_ = false;
  double theta_ = 0.0;
  RationalAngle rational_{};
};

/// Coupling coefficients of one base orbit, generated on demand. If the
/// orbit returns exactly to its seed, one period is generated and repeated.
class CouplingCache {
 public:
  CouplingCache(const skew::KanSystem& sys, const BaseSeed& seed);

  /// The first n coefficients; the span is invalidated by a later, longer request.
  std::span<const double> prefix(std::size_t n);
  /// Exact period of the base orbit, once detected.
  std::optional<std::size_t> period() const { return period_; }

 private:
  BaseSeed seed_;
  CouplingStream stream_;
  std::vector<double> coeffs_;
  std::optional<std::size_t> period_;
};

/// Angles theta, E(theta), ..., E^{count-1}(theta).
std::vector<double> base_orbit(const torus::ExpandingCircleMap& map, const BaseSeed& seed,
                               std::size_t count);

}  // namespace kanlab
