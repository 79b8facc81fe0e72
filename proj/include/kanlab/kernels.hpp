#pragma once

// Data-parallel fiber kernels. Every kernel exists as a scalar reference
// and as AVX2 / AVX-512 variants; all variants produce bitwise identical
// results (no FMA contraction, identical operation order), so the active
// instruction set never changes an artifact.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "kanlab/trig_poly.hpp"

namespace kanlab::kernels {

enum class Isa { scalar, avx2, avx512 };

std::string_view to_string(Isa isa);

/// Best variant compiled in and supported by the running CPU.
Isa detected_isa();
/// Variant used by the dispatching entry points. Defaults to detected_isa(),
/// or to KANLAB_ISA={scalar,avx2,avx512} when set.
Isa active_isa();
/// Throws PreconditionError when the variant is unavailable.
void set_active_isa(Isa isa);
bool isa_available(Isa isa);

/// Product fiber t -> t + e*xi(t), with e = epsilon*C(theta) supplied per step.
/// Evaluated as t + ((e*t)*q(t) + e*a0) where xi(t) = a0 + t*q(t).
struct FiberPoly {
  static constexpr int kMaxTerms = 12;
  std::array<double, kMaxTerms> q{};     // q(t) = xi(t)/t without a0, ascending
  int q_terms = 0;
  double a0 = 0.0;
  std::array<double, kMaxTerms> dxi{};   // xi'(t), ascending
  int dxi_terms = 0;
};

FiberPoly make_fiber_poly(const Polynomial& xi);

enum Label : std::int8_t { kBasin0 = 0, kBasin1 = 1, kUndecided = 2 };

/// Per-lane classifier state; spans must all have the same length.
struct LaneState {
  std::span<double> t;
  std::span<std::int32_t> run0;  // consecutive steps with t < delta
  std::span<std::int32_t> run1;  // consecutive steps with t > 1 - delta
  std::span<std::int8_t> label;
  std::span<std::int64_t> hit;   // step at which the label was decided
};

struct WindowRule {
  double delta = 1e-6;
  std::int32_t window = 50;
};

/// Advance every undecided lane through coeffs.size() fiber steps sharing
/// the same coupling sequence. Step s of this call is global step
/// step_offset + s + 1. Decided lanes are left untouched.
void classify_advance(std::span<const double> coeffs, std::int64_t step_offset,
                      const FiberPoly& poly, WindowRule rule, const LaneState& lanes);

/// t[i] <- phi_{n-1} o ... o phi_0 (t[i]) and deriv[i] <- product of the
/// t-derivatives along the way.
void compose(std::span<const double> coeffs, const FiberPoly& poly, std::span<double> t,
             std::span<double> deriv);

// Per-variant entry points, exposed for the equivalence tests.
namespace scalar {
void classify_advance(const double* coeffs, std::size_t steps, std::int64_t step_offset,
                      const FiberPoly& poly, WindowRule rule, std::size_t lanes, double* t,
                      std::int32_t* run0, std::int32_t* run1, std::int8_t* label,
                      std::int64_t* hit);
void compose(const double* coeffs, std::size_t steps, const FiberPoly& poly, std::size_t lanes,
             double* t, double* deriv);
}  // namespace scalar

namespace avx2 {
void classify_advance(const double* coeffs, std::size_t steps, std::int64_t step_offset,
                      const FiberPoly& poly, WindowRule rule, std::size_t lanes, double* t,
                      std::int32_t* run0, std::int32_t* run1, std::int8_t* label,
                      std::int64_t* hit);
void compose(const double* coeffs, std::size_t steps, const FiberPoly& poly, std::size_t lanes,
             double* t, double* deriv);
}  // namespace avx2

namespace avx512 {
void classify_advance(const double* coeffs, std::size_t steps, std::int64_t step_offset,
                      const FiberPoly& poly, WindowRule rule, std::size_t lanes, double* t,
                      std::int32_t* run0, std::int32_t* run1, std::int8_t* label,
                      std::int64_t* hit);
void compose(const double* coeffs, std::size_t steps, const FiberPoly& poly, std::size_t lanes,
             double* t, double* deriv);
}  // namespace avx512

}  // namespace kanlab::kernels
