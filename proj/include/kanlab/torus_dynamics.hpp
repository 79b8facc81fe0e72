#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kanlab/angle.hpp"
#include "kanlab/trig_poly.hpp"

namespace kanlab::torus {

/// E(theta) = k*theta + amplitude*u(theta) (mod 1) with u a trigonometric
/// polynomial. The lift k*theta + amplitude*u(theta) satisfies
/// lift(theta + 1) = lift(theta) + k.
class ExpandingCircleMap {
 public:
  ExpandingCircleMap(int degree, TrigPoly perturbation = {}, double amplitude = 0.0);

  static ExpandingCircleMap linear(int degree) { return ExpandingCircleMap(degree); }

  int degree() const { return degree_; }
  const TrigPoly& perturbation() const { return u_; }
  double amplitude() const { return amplitude_; }
  bool is_linear() const { return amplitude_ == 0.0 || u_.is_zero(); }

  /// E(theta) reduced into [0,1).
  double operator()(double theta) const { return evaluate(theta); }
  double evaluate(double theta) const;
  double lift(double x) const;
  double derivative(double theta) const;

  /// Exact image of a rational angle; only valid for linear maps.
  RationalAngle evaluate(RationalAngle theta) const;

  /// Lower bound of |E'| from the coefficient bound; used as a cheap
  /// constant for Bowen-ball windows. verify_expanding gives the grid value.
  double expansion_lower_bound() const;
  double expansion_upper_bound() const;

 private:
  int degree_;
  TrigPoly u_;
  double amplitude_;
};

struct PeriodicPoint {
  double angle = 0.0;
  int period = 1;                      // minimal period
  std::vector<double> orbit;           // angle, E(angle), ..., length = period
  double multiplier = 1.0;             // (E^period)' along the orbit
  std::optional<RationalAngle> exact;  // set for linear maps
};

struct PeriodicPointReport {
  int n = 1;
  std::uint64_t fixed_point_count = 0;  // #Fix(E^n) found
  std::uint64_t orbit_count = 0;        // distinct orbits inside Fix(E^n)
  std::uint64_t refinement_failures = 0;
  std::vector<PeriodicPoint> orbits;    // one representative per orbit, stride-sampled
};

struct ExpansionReport {
  double min_derivative = 0.0;  // min |E'| over the grid
  double argmin = 0.0;
  double max_derivative = 0.0;
  bool passed = false;
};

/// The |k| preimages of theta, ordered by lift branch index.
/// Throws ConvergenceError naming the branch if refinement fails.
std::vector<double> inverse_branches(const ExpandingCircleMap& map, double theta);

/// Orbits inside Fix(E^n). For linear maps the fixed points are the exact
/// rationals j/(k^n - 1); otherwise these seeds are Newton-refined on the
/// lift equation. At most `cap` orbits are kept (uniform stride over the
/// deduplicated list). If primitive_only, orbits whose minimal period is a
/// proper divisor of n are dropped from the list (they are still counted).
PeriodicPointReport periodic_points(const ExpandingCircleMap& map, int n, std::size_t cap,
                                    bool primitive_only = false);

ExpansionReport verify_expanding(const ExpandingCircleMap& map, std::size_t grid);

/// Smallest separation between consecutive preimages over a grid of base
/// points; an empirical stand-in for the injectivity radius.
double branch_separation(const ExpandingCircleMap& map, std::size_t grid);

}  // namespace kanlab::torus
