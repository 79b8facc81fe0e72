#include "fiber_common.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

namespace kanlab::kernels::avx2 {

namespace {

constexpr std::size_t kWidth = 4;
constexpr std::size_t kUnroll = 4;
constexpr std::size_t kBlock = kWidth * kUnroll;

struct Broadcasts {
  __m256d q[FiberPoly::kMaxTerms];
  __m256d dxi[FiberPoly::kMaxTerms];
  __m256d a0;
  int q_terms;
  int dxi_terms;

  explicit Broadcasts(const FiberPoly& p) : a0(_mm256_set1_pd(p.a0)), q_terms(p.q_terms),
                                            dxi_terms(p.dxi_terms) {
    for (int k = 0; k < FiberPoly::kMaxTerms; ++k) {
      q[k] = _mm256_set1_pd(p.q[k]);
      dxi[k] = _mm256_set1_pd(p.dxi[k]);
    }
  }
};

inline __m256d horner(const __m256d* c, int terms, __m256d t) {
  if (terms == 0) return _mm256_setzero_pd();
  __m256d acc = c[terms - 1];
  for (int k = terms - 2; k >= 0; --k) acc = _mm256_add_pd(_mm256_mul_pd(acc, t), c[k]);
  return acc;
}

inline __m256d step(const Broadcasts& b, __m256d e, __m256d ea0, __m256d t) {
  __m256d q = horner(b.q, b.q_terms, t);
  __m256d tn = _mm256_add_pd(t, _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(e, t), q), ea0));
  tn = _mm256_max_pd(_mm256_setzero_pd(), tn);
  return _mm256_min_pd(_mm256_set1_pd(1.0), tn);
}

inline __m256d load_counts(const std::int32_t* p) {
  return _mm256_cvtepi32_pd(_mm_loadu_si128(reinterpret_cast<const __m128i*>(p)));
}

inline void store_counts(std::int32_t* p, __m256d v) {
  _mm_storeu_si128(reinterpret_cast<__m128i*>(p), _mm256_cvtpd_epi32(v));
}

}  // namespace

void classify_advance(const double* coeffs, std::size_t steps, std::int64_t step_offset,
                      const FiberPoly& poly, WindowRule rule, std::size_t lanes, double* t,
                      std::int32_t* run0, std::int32_t* run1, std::int8_t* label,
                      std::int64_t* hit) {
  const Broadcasts b(poly);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d delta = _mm256_set1_pd(rule.delta);
  const __m256d upper = _mm256_set1_pd(1.0 - rule.delta);
  const __m256d window = _mm256_set1_pd(static_cast<double>(rule.window));

  std::size_t i = 0;
  for (; i + kBlock <= lanes; i += kBlock) {
    __m256d tv[kUnroll], r0[kUnroll], r1[kUnroll], live[kUnroll];
    int live_bits[kUnroll];
    int any = 0;
    for (std::size_t u = 0; u < kUnroll; ++u) {
      const std::size_t base = i + u * kWidth;
      tv[u] = _mm256_loadu_pd(t + base);
      r0[u] = load_counts(run0 + base);
      r1[u] = load_counts(run1 + base);
      alignas(32) std::int64_t m[kWidth];
      int bits = 0;
      for (std::size_t l = 0; l < kWidth; ++l) {
        bool undecided = label[base + l] == kUndecided;
        m[l] = undecided ? -1 : 0;
        bits |= undecided ? (1 << l) : 0;
      }
      live[u] = _mm256_castsi256_pd(_mm256_load_si256(reinterpret_cast<const __m256i*>(m)));
      live_bits[u] = bits;
      any |= bits;
    }
    if (!any) continue;

    for (std::size_t s = 0; s < steps && any; ++s) {
      const __m256d e = _mm256_set1_pd(coeffs[s]);
      const __m256d ea0 = _mm256_mul_pd(e, b.a0);
      any = 0;
      for (std::size_t u = 0; u < kUnroll; ++u) {
        if (!live_bits[u]) continue;
        const __m256d tn = step(b, e, ea0, tv[u]);
        tv[u] = _mm256_blendv_pd(tv[u], tn, live[u]);
        const __m256d lt = _mm256_cmp_pd(tn, delta, _CMP_LT_OQ);
        const __m256d gt = _mm256_cmp_pd(tn, upper, _CMP_GT_OQ);
        const __m256d n0 = _mm256_and_pd(lt, _mm256_add_pd(r0[u], one));
        const __m256d n1 = _mm256_and_pd(gt, _mm256_add_pd(r1[u], one));
        r0[u] = _mm256_blendv_pd(r0[u], n0, live[u]);
        r1[u] = _mm256_blendv_pd(r1[u], n1, live[u]);
        const __m256d d0 = _mm256_and_pd(live[u], _mm256_cmp_pd(r0[u], window, _CMP_GE_OQ));
        const __m256d d1 = _mm256_andnot_pd(
            d0, _mm256_and_pd(live[u], _mm256_cmp_pd(r1[u], window, _CMP_GE_OQ)));
        const int b0 = _mm256_movemask_pd(d0);
        const int b1 = _mm256_movemask_pd(d1);
        if (b0 | b1) {
          const std::size_t base = i + u * kWidth;
          const std::int64_t when = step_offset + static_cast<std::int64_t>(s) + 1;
          for (std::size_t l = 0; l < kWidth; ++l) {
            if (b0 & (1 << l)) {
              label[base + l] = kBasin0;
              hit[base + l] = when;
            } else if (b1 & (1 << l)) {
              label[base + l] = kBasin1;
              hit[base + l] = when;
            }
          }
          live[u] = _mm256_andnot_pd(_mm256_or_pd(d0, d1), live[u]);
          live_bits[u] &= ~(b0 | b1);
        }
        any |= live_bits[u];
      }
    }

    for (std::size_t u = 0; u < kUnroll; ++u) {
      const std::size_t base = i + u * kWidth;
      _mm256_storeu_pd(t + base, tv[u]);
      store_counts(run0 + base, r0[u]);
      store_counts(run1 + base, r1[u]);
    }
  }
  for (; i < lanes; ++i) {
    detail::classify_lane(coeffs, steps, step_offset, poly, rule, t[i], run0[i], run1[i],
                          label[i], hit[i]);
  }
}

void compose(const double* coeffs, std::size_t steps, const FiberPoly& poly, std::size_t lanes,
             double* t, double* deriv) {
  const Broadcasts b(poly);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + kBlock <= lanes; i += kBlock) {
    __m256d tv[kUnroll], dv[kUnroll];
    for (std::size_t u = 0; u < kUnroll; ++u) {
      tv[u] = _mm256_loadu_pd(t + i + u * kWidth);
      dv[u] = one;
    }
    for (std::size_t s = 0; s < steps; ++s) {
      const __m256d e = _mm256_set1_pd(coeffs[s]);
      const __m256d ea0 = _mm256_mul_pd(e, b.a0);
      for (std::size_t u = 0; u < kUnroll; ++u) {
        const __m256d slope =
            _mm256_add_pd(one, _mm256_mul_pd(e, horner(b.dxi, b.dxi_terms, tv[u])));
        dv[u] = _mm256_mul_pd(dv[u], slope);
        tv[u] = step(b, e, ea0, tv[u]);
      }
    }
    for (std::size_t u = 0; u < kUnroll; ++u) {
      _mm256_storeu_pd(t + i + u * kWidth, tv[u]);
      _mm256_storeu_pd(deriv + i + u * kWidth, dv[u]);
    }
  }
  for (; i < lanes; ++i) detail::compose_lane(coeffs, steps, poly, t[i], deriv[i]);
}

}  // namespace kanlab::kernels::avx2

#else

#include "kanlab/error.hpp"

namespace kanlab::kernels::avx2 {

void classify_advance(const double*, std::size_t, std::int64_t, const FiberPoly&, WindowRule,
                      std::size_t, double*, std::int32_t*, std::int32_t*, std::int8_t*,
                      std::int64_t*) {
  throw PreconditionError("AVX2 kernels were not compiled in");
}

void compose(const double*, std::size_t, const FiberPoly&, std::size_t, double*, double*) {
  throw PreconditionError("AVX2 kernels were not compiled in");
}

}  // namespace kanlab::kernels::avx2

#endif
