#include <atomic>
#include <cstdlib>
#include <string>

#include "kanlab/error.hpp"
#include "kanlab/kernels.hpp"

namespace kanlab::kernels {

namespace {

bool cpu_has(Isa isa) {
#if defined(__x86_64__) || defined(__i386__)
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(KANLAB_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::avx512:
#if defined(KANLAB_HAVE_AVX512)
      return __builtin_cpu_supports("avx512f");
#else
      return false;
#endif
  }
  return false;
#else
  return isa == Isa::scalar;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("KANLAB_ISA")) {
    std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && cpu_has(Isa::avx2)) return Isa::avx2;
    if (v == "avx512" && cpu_has(Isa::avx512)) return Isa::avx512;
  }
  return detected_isa();
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::avx512:
      return "avx512";
  }
  return "unknown";
}

bool isa_available(Isa isa) { return cpu_has(isa); }

Isa detected_isa() {
  if (cpu_has(Isa::avx512)) return Isa::avx512;
  if (cpu_has(Isa::avx2)) return Isa::avx2;
  return Isa::scalar;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!cpu_has(isa)) {
    throw PreconditionError("kernel variant not available: " + std::string(to_string(isa)));
  }
  active().store(isa, std::memory_order_relaxed);
}

FiberPoly make_fiber_poly(const Polynomial& xi) {
  const auto& a = xi.coeffs();
  if (static_cast<int>(a.size()) > FiberPoly::kMaxTerms) {
    throw PreconditionError("fiber polynomial degree too large for the kernels");
  }
  FiberPoly p;
  p.a0 = a[0];
  p.q_terms = static_cast<int>(a.size()) - 1;
  for (int k = 0; k < p.q_terms; ++k) p.q[k] = a[k + 1];
  p.dxi_terms = p.q_terms;
  for (int k = 0; k < p.dxi_terms; ++k) p.dxi[k] = static_cast<double>(k + 1) * a[k + 1];
  return p;
}

void classify_advance(std::span<const double> coeffs, std::int64_t step_offset,
                      const FiberPoly& poly, WindowRule rule, const LaneState& lanes) {
  const std::size_t n = lanes.t.size();
  if (lanes.run0.size() != n || lanes.run1.size() != n || lanes.label.size() != n ||
      lanes.hit.size() != n) {
    throw PreconditionError("classify_advance: lane spans differ in length");
  }
  auto fn = &scalar::classify_advance;
  switch (active_isa()) {
    case Isa::avx512:
      fn = &avx512::classify_advance;
      break;
    case Isa::avx2:
      fn = &avx2::classify_advance;
      break;
    case Isa::scalar:
      break;
  }
  fn(coeffs.data(), coeffs.size(), step_offset, poly, rule, n, lanes.t.data(), lanes.run0.data(),
     lanes.run1.data(), lanes.label.data(), lanes.hit.data());
}

void compose(std::span<const double> coeffs, const FiberPoly& poly, std::span<double> t,
             std::span<double> deriv) {
  if (t.size() != deriv.size()) throw PreconditionError("compose: span sizes differ");
  auto fn = &scalar::compose;
  switch (active_isa()) {
    case Isa::avx512:
      fn = &avx512::compose;
      break;
    case Isa::avx2:
      fn = &avx2::compose;
      break;
    case Isa::scalar:
      break;
  }
  fn(coeffs.data(), coeffs.size(), poly, t.size(), t.data(), deriv.data());
}

}  // namespace kanlab::kernels
