#include "kanlab/angle.hpp"

#include <numbers>

#include "kanlab/error.hpp"

namespace kanlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// r in [0, 1/8]
SinCos base_sincos(double r) {
  double a = kTwoPi * r;
  return {std::sin(a), std::cos(a)};
}

}  // namespace

SinCos sincos_2pi(double x) {
  double r = wrap01(x);
  double sign = 1.0;
  if (r >= 0.5) {
    r -= 0.5;
    sign = -1.0;
  }
  SinCos out;
  if (r >= 0.25) {
    r -= 0.25;
    if (r > 0.125) {
      SinCos b = base_sincos(0.25 - r);
      out = {b.sin, -b.cos};
    } else {
      SinCos b = base_sincos(r);
      out = {b.cos, -b.sin};
    }
  } else if (r > 0.125) {
    SinCos b = base_sincos(0.25 - r);
    out = {b.cos, b.sin};
  } else {
    out = base_sincos(r);
  }
  return {sign * out.sin, sign * out.cos};
}

SinCos sincos_2pi(RationalAngle a) {
  if (a.den <= 0 || a.den >= (std::int64_t{1} << 56)) {
    throw PreconditionError("sincos_2pi: denominator out of range");
  }
  std::int64_t n = a.num % a.den;
  if (n < 0) n += a.den;
  std::int64_t d = a.den;
  double sign = 1.0;
  if (2 * n >= d) {  // subtract a half turn
    n = 2 * n - d;
    d = 2 * d;
    sign = -1.0;
  }
  auto ratio = [](std::int64_t p, std::int64_t q) {
    return static_cast<double>(p) / static_cast<double>(q);
  };
  SinCos out;
  if (4 * n >= d) {  // quarter turn: cos x = -sin(x - 1/4), sin x = cos(x - 1/4)
    std::int64_t n2 = 4 * n - d;
    std::int64_t d2 = 4 * d;
    if (8 * n2 > d2) {
      SinCos b = base_sincos(ratio(d2 - 4 * n2, 4 * d2));
      out = {b.sin, -b.cos};
    } else {
      SinCos b = base_sincos(ratio(n2, d2));
      out = {b.cos, -b.sin};
    }
  } else if (8 * n > d) {
    SinCos b = base_sincos(ratio(d - 4 * n, 4 * d));
    out = {b.cos, b.sin};
  } else {
    out = base_sincos(ratio(n, d));
  }
  return {sign * out.sin, sign * out.cos};
}

}  // namespace kanlab
