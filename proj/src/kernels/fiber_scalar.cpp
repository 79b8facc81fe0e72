#include "fiber_common.hpp"

namespace kanlab::kernels::scalar {

void classify_advance(const double* coeffs, std::size_t steps, std::int64_t step_offset,
                      const FiberPoly& poly, WindowRule rule, std::size_t lanes, double* t,
                      std::int32_t* run0, std::int32_t* run1, std::int8_t* label,
                      std::int64_t* hit) {
  for (std::size_t i = 0; i < lanes; ++i) {
    detail::classify_lane(coeffs, steps, step_offset, poly, rule, t[i], run0[i], run1[i],
                          label[i], hit[i]);
  }
}

void compose(const double* coeffs, std::size_t steps, const FiberPoly& poly, std::size_t lanes,
             double* t, double* deriv) {
  for (std::size_t i = 0; i < lanes; ++i) detail::compose_lane(coeffs, steps, poly, t[i], deriv[i]);
}

}  // namespace kanlab::kernels::scalar
