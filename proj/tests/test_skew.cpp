#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kanlab/error.hpp"
#include "kanlab/kernels.hpp"
#include "kanlab/orbit.hpp"
#include "kanlab/skew.hpp"

using namespace kanlab;
using skew::FiberFamily;
using skew::KanSystem;

namespace {

double literal_kan_fiber(double theta, double t) {
  double c = sincos_2pi(theta).cos;
  return t + c * (t / 32.0) * (1.0 - t);
}

KanSystem with_xi(std::vector<double> xi, double eps = 1.0 / 32.0) {
  return KanSystem(torus::ExpandingCircleMap::linear(3),
                   FiberFamily::product(eps, TrigPoly::cosine(1), Polynomial(std::move(xi))));
}

}  // namespace

TEST_CASE("kan1994 reproduces the literal formula bitwise") {
  auto sys = KanSystem::kan1994();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    double theta = u(rng), t = u(rng);
    auto p = sys.step({theta, t});
    CHECK(p.t == literal_kan_fiber(theta, t));
    CHECK(p.theta == wrap01(3.0 * theta));
    CHECK(std::fabs(p.t - (t + std::cos(2 * std::numbers::pi * theta) * (t / 32) * (1 - t))) < 1e-15);
  }
}

TEST_CASE("K1: boundary circles are invariant exactly") {
  auto r = skew::verify_K1(KanSystem::kan1994(), 1 << 16);
  CHECK(r.passed);
  CHECK(r.max_deviation == 0.0);
  // A fiber map moving t=0 breaks K1.
  auto bad = with_xi({1e-3, 1.0, -1.0});
  CHECK_FALSE(skew::verify_K1(bad, 1024).passed);
}

TEST_CASE("K2: fiber derivative bound against half the base expansion") {
  auto r = skew::verify_K2(KanSystem::kan1994(), 1 << 12, 1 << 10);
  CHECK(r.passed);
  CHECK(r.max_abs_dt == 1.0 + 1.0 / 32.0);
  CHECK(r.threshold == 1.5);
  auto strong = skew::verify_K2(with_xi({0.0, 1.0, -1.0}, 0.75), 1 << 10, 1 << 8);
  CHECK_FALSE(strong.passed);
  CHECK(strong.max_abs_dt == 1.75);
  CHECK_FALSE(strong.violations.empty());
}

TEST_CASE("K3: boundary fixed points over the two fixed fibers") {
  auto r = skew::verify_K3(KanSystem::kan1994());
  REQUIRE(r.passed);
  CHECK(*r.p == 0.5);
  CHECK(*r.q == 0.0);
  for (const auto& f : r.fibers) {
    CHECK(f.interior.empty());
    CHECK_FALSE(f.degenerate);
  }
  auto flipped = skew::verify_K3(KanSystem::kan1994().with_epsilon(-1.0 / 32.0));
  REQUIRE(flipped.passed);
  CHECK(*flipped.p == 0.0);
  CHECK(*flipped.q == 0.5);
}

TEST_CASE("K3 fails on an interior fixed point or a degenerate fiber") {
  // xi = t(1-t)(t-1/2) fixes t = 1/2 in every fiber.
  auto interior = skew::verify_K3(with_xi({0.0, -0.5, 1.5, -1.0}, 0.25));
  CHECK_FALSE(interior.passed);
  bool saw = false;
  for (const auto& f : interior.fibers) {
    if (!f.interior.empty()) {
      saw = true;
      CHECK(f.interior.size() == 1);
      CHECK(f.interior[0] == doctest::Approx(0.5).epsilon(1e-12));
    }
  }
  CHECK(saw);
  auto identity = skew::verify_K3(with_xi({0.0}, 0.0));
  CHECK_FALSE(identity.passed);
  CHECK(identity.fibers[0].degenerate);
}

TEST_CASE("step clamps tiny excursions and rejects large ones") {
  auto general = [](double push) {
    return KanSystem(torus::ExpandingCircleMap::linear(2),
                     FiberFamily::general([push](double, double t) { return t + push; },
                                          [](double, double) { return 1.0; },
                                          [](double, double) { return 0.0; }));
  };
  CHECK(general(1e-14).step({0.1, 1.0}).t == 1.0);
  CHECK_THROWS_AS(general(1e-9).step({0.1, 1.0}), InvariantError);
  CHECK_THROWS_AS(KanSystem::kan1994().step({0.1, 1.5}), PreconditionError);
}

TEST_CASE("fiber composition value and derivative") {
  auto sys = KanSystem::kan1994().with_epsilon(0.3);
  for (double theta : {0.1, 0.37, 0.9}) {
    auto f = skew::fiber_composition(sys, theta, 12);
    for (double t : {0.05, 0.4, 0.8}) {
      // Direct iteration of step() as the oracle.
      skew::Point x{theta, t};
      for (int i = 0; i < 12; ++i) x = sys.step(x);
      auto v = f(t);
      CHECK(v.value == x.t);
      double h = 1e-5;
      double fd = (f(t + h).value - f(t - h).value) / (2 * h);
      CHECK(v.derivative == doctest::Approx(fd).epsilon(1e-8));
    }
  }
}

TEST_CASE("compose kernel agrees with the fiber composition") {
  auto sys = KanSystem::kan1994().with_epsilon(0.2);
  auto f = skew::fiber_composition(sys, 0.123, 40);
  std::vector<double> t{0.1, 0.5, 0.9}, d(3);
  auto t0 = t;
  kernels::compose(f.coefficients(), sys.fiber().kernel_poly(), t, d);
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto v = f(t0[i]);
    CHECK(t[i] == v.value);
    CHECK(d[i] == v.derivative);
  }
}

TEST_CASE("exact rational coupling streams are periodic") {
  auto sys = KanSystem::kan1994();
  CouplingStream s(sys, RationalAngle{17, 242});
  auto e = s.take(50);
  for (std::size_t i = 5; i < e.size(); ++i) CHECK(e[i] == e[i - 5]);
  CHECK(e[0] == sincos_2pi(17.0 / 242.0).cos / 32.0);
  // The half-turn partner has exactly negated couplings.
  CouplingStream h(sys, RationalAngle{17 + 121, 242});
  auto eh = h.take(50);
  for (std::size_t i = 0; i < e.size(); ++i) CHECK(eh[i] == -e[i]);
  CHECK(s.current_angle() == doctest::Approx(RationalAngle{17 * 243 % 242, 242}.value()));
}
