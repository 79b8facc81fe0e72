#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "kanlab/kernels.hpp"

using namespace kanlab;
using namespace kanlab::kernels;

namespace {

struct Lanes {
  std::vector<double> t;
  std::vector<std::int32_t> run0, run1;
  std::vector<std::int8_t> label;
  std::vector<std::int64_t> hit;
  explicit Lanes(std::size_t n, std::uint64_t seed)
      : t(n), run0(n, 0), run1(n, 0), label(n, kUndecided), hit(n, -1) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& x : t) x = u(rng);
  }
  bool operator==(const Lanes&) const = default;
};

using ClassifyFn = void (*)(const double*, std::size_t, std::int64_t, const FiberPoly&, WindowRule,
                            std::size_t, double*, std::int32_t*, std::int32_t*, std::int8_t*,
                            std::int64_t*);
using ComposeFn = void (*)(const double*, std::size_t, const FiberPoly&, std::size_t, double*, double*);

struct Variant {
  Isa isa;
  ClassifyFn classify;
  ComposeFn compose;
};

std::vector<Variant> variants() {
  std::vector<Variant> v{{Isa::scalar, scalar::classify_advance, scalar::compose}};
  if (isa_available(Isa::avx2)) v.push_back({Isa::avx2, avx2::classify_advance, avx2::compose});
  if (isa_available(Isa::avx512)) v.push_back({Isa::avx512, avx512::classify_advance, avx512::compose});
  return v;
}

// Independent restatement of the window rule, one lane at a time.
void oracle_classify(const std::vector<double>& coeffs, const Polynomial& xi, WindowRule rule, Lanes& l) {
  for (std::size_t i = 0; i < l.t.size(); ++i) {
    double t = l.t[i];
    int r0 = 0, r1 = 0;
    for (std::size_t s = 0; s < coeffs.size(); ++s) {
      double a0 = xi.coeffs()[0];
      // Horner for (xi - a0)/t, in the order the kernels use.
      double qq = 0.0;
      const auto& a = xi.coeffs();
      for (std::size_t k = a.size(); k-- > 1;) qq = qq * t + a[k];
      t = std::clamp(t + ((coeffs[s] * t) * qq + coeffs[s] * a0), 0.0, 1.0);
      r0 = t < rule.delta ? r0 + 1 : 0;
      r1 = t > 1.0 - rule.delta ? r1 + 1 : 0;
      if (r0 >= rule.window || r1 >= rule.window) {
        l.label[i] = r0 >= rule.window ? kBasin0 : kBasin1;
        l.hit[i] = static_cast<std::int64_t>(s) + 1;
        break;
      }
    }
    l.t[i] = t;
    l.run0[i] = r0;
    l.run1[i] = r1;
  }
}

std::vector<double> random_coeffs(std::size_t n, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(n);
  for (auto& x : c) x = scale * u(rng) + 0.1 * scale;
  return c;
}

}  // namespace

TEST_CASE("fiber poly splits xi into a0 + t q(t)") {
  auto p = make_fiber_poly(Polynomial({0.0, 1.0, -1.0}));
  CHECK(p.a0 == 0.0);
  CHECK(p.q_terms == 2);
  CHECK(p.q[0] == 1.0);
  CHECK(p.q[1] == -1.0);
  CHECK(p.dxi_terms == 2);
  CHECK(p.dxi[1] == -2.0);
}

TEST_CASE("active isa is one of the available variants") {
  CHECK(isa_available(active_isa()));
  CHECK(isa_available(Isa::scalar));
  MESSAGE("detected isa: " << to_string(detected_isa()));
}

TEST_CASE("scalar classifier matches the literal window rule") {
  Polynomial xi({0.0, 1.0, -1.0});
  auto poly = make_fiber_poly(xi);
  WindowRule rule{1e-6, 20};
  auto coeffs = random_coeffs(3000, 0.6, 5);
  Lanes a(257, 9), b = a;
  scalar::classify_advance(coeffs.data(), coeffs.size(), 0, poly, rule, a.t.size(), a.t.data(),
                           a.run0.data(), a.run1.data(), a.label.data(), a.hit.data());
  oracle_classify(coeffs, xi, rule, b);
  CHECK(a == b);
  auto decided = std::count_if(a.label.begin(), a.label.end(), [](auto x) { return x != kUndecided; });
  CHECK(decided > 0);
}

TEST_CASE("SIMD classifiers are bitwise equal to scalar") {
  const std::vector<Polynomial> polys{Polynomial({0.0, 1.0, -1.0}), Polynomial({0.0, 0.5, 0.7, -1.2}),
                                      Polynomial({0.0, 1.0, -3.0, 2.0})};
  for (const auto& xi : polys) {
    auto poly = make_fiber_poly(xi);
    for (std::size_t lanes : {1u, 3u, 4u, 31u, 32u, 33u, 100u, 1000u}) {
      auto coeffs = random_coeffs(4000, 0.5, lanes);
      WindowRule rule{1e-6, 25};
      Lanes ref(lanes, lanes * 7 + 1);
      // Advance in uneven chunks to exercise the step offset.
      auto run = [&](const Variant& v, Lanes& l) {
        std::size_t pos = 0;
        for (std::size_t chunk : {1u, 17u, 500u, 3482u}) {
          v.classify(coeffs.data() + pos, chunk, static_cast<std::int64_t>(pos), poly, rule, lanes, l.t.data(),
                     l.run0.data(), l.run1.data(), l.label.data(), l.hit.data());
          pos += chunk;
        }
      };
      auto vs = variants();
      Lanes base = ref;
      run(vs[0], base);
      for (std::size_t k = 1; k < vs.size(); ++k) {
        Lanes other = ref;
        run(vs[k], other);
        CHECK_MESSAGE(other == base, to_string(vs[k].isa) << " lanes=" << lanes);
      }
    }
  }
}

TEST_CASE("SIMD compose is bitwise equal to scalar") {
  auto poly = make_fiber_poly(Polynomial({0.0, 1.0, -1.0}));
  for (std::size_t lanes : {1u, 5u, 8u, 64u, 67u}) {
    auto coeffs = random_coeffs(200, 0.3, 100 + lanes);
    Lanes init(lanes, lanes);
    auto vs = variants();
    std::vector<double> t0 = init.t, d0(lanes);
    vs[0].compose(coeffs.data(), coeffs.size(), poly, lanes, t0.data(), d0.data());
    for (std::size_t k = 1; k < vs.size(); ++k) {
      std::vector<double> t = init.t, d(lanes);
      vs[k].compose(coeffs.data(), coeffs.size(), poly, lanes, t.data(), d.data());
      CHECK(t == t0);
      CHECK(d == d0);
    }
  }
}

TEST_CASE("dispatch honours set_active_isa") {
  auto saved = active_isa();
  for (auto v : variants()) {
    set_active_isa(v.isa);
    CHECK(active_isa() == v.isa);
  }
  set_active_isa(saved);
}
