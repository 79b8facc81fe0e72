#include "fiber_common.hpp"

#if defined(__AVX512F__)
#include <immintrin.h>

namespace kanlab::kernels::avx512 {

namespace {

constexpr std::size_t kWidth = 8;
constexpr std::size_t kUnroll = 4;  // independent vectors in flight
constexpr std::size_t kBlock = kWidth * kUnroll;

struct Broadcasts {
  __m512d q[FiberPoly::kMaxTerms];
  __m512d dxi[FiberPoly::kMaxTerms];
  __m512d a0;
  int q_terms;
  int dxi_terms;

  explicit Broadcasts(const FiberPoly& p) : a0(_mm512_set1_pd(p.a0)), q_terms(p.q_terms),
                                            dxi_terms(p.dxi_terms) {
    for (int k = 0; k < FiberPoly::kMaxTerms; ++k) {
      q[k] = _mm512_set1_pd(p.q[k]);
      dxi[k] = _mm512_set1_pd(p.dxi[k]);
    }
  }
};

inline __m512d horner(const __m512d* c, int terms, __m512d t) {
  if (terms == 0) return _mm512_setzero_pd();
  __m512d acc = c[terms - 1];
  for (int k = terms - 2; k >= 0; --k) acc = _mm512_add_pd(_mm512_mul_pd(acc, t), c[k]);
  return acc;
}

inline __m512d step(const Broadcasts& b, __m512d e, __m512d ea0, __m512d t) {
  __m512d q = horner(b.q, b.q_terms, t);
  __m512d tn = _mm512_add_pd(t, _mm512_add_pd(_mm512_mul_pd(_mm512_mul_pd(e, t), q), ea0));
  tn = _mm512_max_pd(_mm512_setzero_pd(), tn);
  return _mm512_min_pd(_mm512_set1_pd(1.0), tn);
}

}  // namespace

void classify_advance(const double* coeffs, std::size_t steps, std::int64_t step_offset,
                      const FiberPoly& poly, WindowRule rule, std::size_t lanes, double* t,
                      std::int32_t* run0, std::int32_t* run1, std::int8_t* label,
                      std::int64_t* hit) {
  const Broadcasts b(poly);
  const __m512d one = _mm512_set1_pd(1.0);
  const __m512d delta = _mm512_set1_pd(rule.delta);
  const __m512d upper = _mm512_set1_pd(1.0 - rule.delta);
  const __m512d window = _mm512_set1_pd(static_cast<double>(rule.window));

  std::size_t i = 0;
  for (; i + kBlock <= lanes; i += kBlock) {
    __m512d tv[kUnroll], r0[kUnroll], r1[kUnroll];
    __mmask8 live[kUnroll];
    __mmask8 any = 0;
    for (std::size_t u = 0; u < kUnroll; ++u) {
      const std::size_t base = i + u * kWidth;
      tv[u] = _mm512_loadu_pd(t + base);
      r0[u] = _mm512_cvtepi32_pd(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(run0 + base)));
      r1[u] = _mm512_cvtepi32_pd(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(run1 + base)));
      __mmask8 m = 0;
      for (std::size_t l = 0; l < kWidth; ++l) {
        if (label[base + l] == kUndecided) m = static_cast<__mmask8>(m | (1u << l));
      }
      live[u] = m;
      any = static_cast<__mmask8>(any | m);
    }
    if (!any) continue;

    for (std::size_t s = 0; s < steps && any; ++s) {
      const __m512d e = _mm512_set1_pd(coeffs[s]);
      const __m512d ea0 = _mm512_mul_pd(e, b.a0);
      any = 0;
      for (std::size_t u = 0; u < kUnroll; ++u) {
        if (!live[u]) continue;
        const __m512d tn = step(b, e, ea0, tv[u]);
        tv[u] = _mm512_mask_blend_pd(live[u], tv[u], tn);
        const __mmask8 lt = _mm512_cmp_pd_mask(tn, delta, _CMP_LT_OQ);
        const __mmask8 gt = _mm512_cmp_pd_mask(tn, upper, _CMP_GT_OQ);
        const __m512d n0 = _mm512_maskz_add_pd(lt, r0[u], one);
        const __m512d n1 = _mm512_maskz_add_pd(gt, r1[u], one);
        r0[u] = _mm512_mask_blend_pd(live[u], r0[u], n0);
        r1[u] = _mm512_mask_blend_pd(live[u], r1[u], n1);
        const __mmask8 d0 = live[u] & _mm512_cmp_pd_mask(r0[u], window, _CMP_GE_OQ);
        const __mmask8 d1 = live[u] & ~d0 & _mm512_cmp_pd_mask(r1[u], window, _CMP_GE_OQ);
        if (d0 | d1) {
          const std::size_t base = i + u * kWidth;
          const std::int64_t when = step_offset + static_cast<std::int64_t>(s) + 1;
          for (std::size_t l = 0; l < kWidth; ++l) {
            if (d0 & (1u << l)) {
              label[base + l] = kBasin0;
              hit[base + l] = when;
            } else if (d1 & (1u << l)) {
              label[base + l] = kBasin1;
              hit[base + l] = when;
            }
          }
          live[u] = static_cast<__mmask8>(live[u] & ~(d0 | d1));
        }
        any = static_cast<__mmask8>(any | live[u]);
      }
    }

    for (std::size_t u = 0; u < kUnroll; ++u) {
      const std::size_t base = i + u * kWidth;
      _mm512_storeu_pd(t + base, tv[u]);
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(run0 + base), _mm512_cvtpd_epi32(r0[u]));
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(run1 + base), _mm512_cvtpd_epi32(r1[u]));
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
  const __m512d one = _mm512_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + kBlock <= lanes; i += kBlock) {
    __m512d tv[kUnroll], dv[kUnroll];
    for (std::size_t u = 0; u < kUnroll; ++u) {
      tv[u] = _mm512_loadu_pd(t + i + u * kWidth);
      dv[u] = one;
    }
    for (std::size_t s = 0; s < steps; ++s) {
      const __m512d e = _mm512_set1_pd(coeffs[s]);
      const __m512d ea0 = _mm512_mul_pd(e, b.a0);
      for (std::size_t u = 0; u < kUnroll; ++u) {
        const __m512d slope =
            _mm512_add_pd(one, _mm512_mul_pd(e, horner(b.dxi, b.dxi_terms, tv[u])));
        dv[u] = _mm512_mul_pd(dv[u], slope);
        tv[u] = step(b, e, ea0, tv[u]);
      }
    }
    for (std::size_t u = 0; u < kUnroll; ++u) {
      _mm512_storeu_pd(t + i + u * kWidth, tv[u]);
      _mm512_storeu_pd(deriv + i + u * kWidth, dv[u]);
    }
  }
  for (; i < lanes; ++i) detail::compose_lane(coeffs, steps, poly, t[i], deriv[i]);
}

}  // namespace kanlab::kernels::avx512

#else

#include "kanlab/error.hpp"

namespace kanlab::kernels::avx512 {

void classify_advance(const double*, std::size_t, std::int64_t, const FiberPoly&, WindowRule,
                      std::size_t, double*, std::int32_t*, std::int32_t*, std::int8_t*,
                      std::int64_t*) {
  throw PreconditionError("AVX-512 kernels were not compiled in");
}

void compose(const double*, std::size_t, const FiberPoly&, std::size_t, double*, double*) {
  throw PreconditionError("AVX-512 kernels were not compiled in");
}

}  // namespace kanlab::kernels::avx512

#endif
