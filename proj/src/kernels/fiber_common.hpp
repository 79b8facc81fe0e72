#pragma once

// Scalar building blocks shared by every kernel variant. SIMD variants
// use these for tail lanes, so the arithmetic here defines the bits.

#include "kanlab/kernels.hpp"

namespace kanlab::kernels::detail {

inline double fiber_step(double e, double t, const FiberPoly& p) {
  double q = 0.0;
  if (p.q_terms > 0) {
    q = p.q[p.q_terms - 1];
    for (int k = p.q_terms - 2; k >= 0; --k) q = q * t + p.q[k];
  }
  double tn = t + ((e * t) * q + e * p.a0);
  tn = tn < 0.0 ? 0.0 : tn;
  tn = tn > 1.0 ? 1.0 : tn;
  return tn;
}

inline double fiber_derivative(double e, double t, const FiberPoly& p) {
  double d = 0.0;
  if (p.dxi_terms > 0) {
    d = p.dxi[p.dxi_terms - 1];
    for (int k = p.dxi_terms - 2; k >= 0; --k) d = d * t + p.dxi[k];
  }
  return 1.0 + e * d;
}

inline void classify_lane(const double* coeffs, std::size_t steps, std::int64_t step_offset,
                          const FiberPoly& poly, WindowRule rule, double& t, std::int32_t& run0,
                          std::int32_t& run1, std::int8_t& label, std::int64_t& hit) {
  if (label != kUndecided) return;
  const double upper = 1.0 - rule.delta;
  for (std::size_t s = 0; s < steps; ++s) {
    t = fiber_step(coeffs[s], t, poly);
    run0 = t < rule.delta ? run0 + 1 : 0;
    run1 = t > upper ? run1 + 1 : 0;
    if (run0 >= rule.window) {
      label = kBasin0;
      hit = step_offset + static_cast<std::int64_t>(s) + 1;
      return;
    }
    if (run1 >= rule.window) {
      label = kBasin1;
      hit = step_offset + static_cast<std::int64_t>(s) + 1;
      return;
    }
  }
}

inline void compose_lane(const double* coeffs, std::size_t steps, const FiberPoly& poly,
                         double& t, double& deriv) {
  double d = 1.0;
  for (std::size_t s = 0; s < steps; ++s) {
    d = d * fiber_derivative(coeffs[s], t, poly);
    t = fiber_step(coeffs[s], t, poly);
  }
  deriv = d;
}

}  // namespace kanlab::kernels::detail
