#pragma once

#include <cmath>
#include <cstdint>

namespace kanlab {

/// Reduce x modulo 1 into [0,1).
inline double wrap01(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

/// Distance on R/Z.
inline double circle_distance(double a, double b) {
  double d = std::fabs(wrap01(a) - wrap01(b));
  return d < 1.0 - d ? d : 1.0 - d;
}

/// An angle held exactly as num/den, 0 <= num < den.
struct RationalAngle {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const RationalAngle&, const RationalAngle&) = default;
};

struct SinCos {
  double sin;
  double cos;
};

/// sin/cos of 2*pi*x. The octant reduction uses only exact floating
/// subtractions, so cos(2*pi*(x+1/2)) == -cos(2*pi*x) bitwise whenever
/// x+1/2 is representable.
SinCos sincos_2pi(double x);

/// sin/cos of 2*pi*num/den with the octant reduction done in integers.
/// Angles that differ by a half turn give exactly negated results.
SinCos sincos_2pi(RationalAngle a);

}  // namespace kanlab
