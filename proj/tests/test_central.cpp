#include <cmath>

#include "doctest.h"
#include "kanlab/central.hpp"
#include "kanlab/error.hpp"
#include "kanlab/exponents.hpp"

using namespace kanlab;
using namespace kanlab::central;
using skew::KanSystem;

namespace {

// Fixed point of t -> p2(K^n(theta, t)) by plain bisection over KanSystem::step,
// given a bracket where phi^n - t changes sign.
double oracle_fixed_point(const KanSystem& sys, double theta, int n, double lo, double hi) {
  auto g = [&](double t) {
    skew::Point x{theta, t};
    for (int i = 0; i < n; ++i) x = sys.step(x);
    return x.t - t;
  };
  double glo = g(lo);
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    if ((g(mid) < 0) == (glo < 0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("sigma pairs under the involution") {
  auto sys = KanSystem::kan1994();
  for (int i = 0; i < 8; ++i) {
    double theta = (37.0 * i + 0.5) / 4096;
    auto a = sigma_bisect(sys, theta);
    auto b = sigma_bisect(sys, theta + 0.5);
    REQUIRE(a.decided);
    REQUIRE(b.decided);
    CHECK(a.sigma > 0.0);
    CHECK(a.sigma < 1.0);
    CHECK(a.hi - a.lo <= 1e-4);
    CHECK(std::fabs(a.sigma + b.sigma - 1.0) <= 2e-4);
  }
}

TEST_CASE("sigma needs decided endpoints") {
  SigmaParams p;
  p.classify.n_max = 2000;
  CHECK_THROWS_AS(sigma_bisect(KanSystem::kan1994().with_epsilon(0.0), 0.3, p), PreconditionError);
}

TEST_CASE("separating graph is independent of the worker count") {
  auto sys = KanSystem::kan1994().with_epsilon(0.25);
  SigmaParams p;
  p.classify.n_max = 20000;
  auto a = separating_graph(sys, 32, p, 1);
  auto b = separating_graph(sys, 32, p, 3);
  for (std::size_t i = 0; i < 32; ++i) {
    CHECK(a.samples[i].sigma == b.samples[i].sigma);
    CHECK(a.samples[i].decided == b.samples[i].decided);
  }
  auto sym = sigma_symmetry(a, 2e-4);
  CHECK(sym.pairs == a.decided() / 2);
  CHECK(sym.within == sym.pairs);
  CHECK(total_variation(a) > 0.0);
}

TEST_CASE("period-1 and period-2 interior orbits") {
  auto sys = KanSystem::kan1994();
  auto r1 = interior_periodic_orbits(sys, 1, 100);
  CHECK(r1.orbits.empty());
  CHECK(r1.skipped_boundary == 2);

  // Direct check of the boundary multipliers over all 8 points j/8.
  int both_sinks = 0;
  for (int j = 0; j < 8; ++j) {
    double th = j / 8.0, m0 = 1.0, m1 = 1.0;
    for (int s = 0; s < 2; ++s) {
      m0 *= sys.fiber().d_dt(th, 0.0);
      m1 *= sys.fiber().d_dt(th, 1.0);
      th = std::fmod(3 * th, 1.0);
    }
    both_sinks += std::fabs(m0) < 1 && std::fabs(m1) < 1;
  }
  auto r2 = interior_periodic_orbits(sys, 2, 100);
  CHECK(r2.considered == 3);
  std::size_t points = 0;
  for (const auto& o : r2.orbits) points += o.orbit_t.size();
  CHECK(static_cast<int>(points) == both_sinks);
  for (const auto& o : r2.orbits) {
    CHECK(o.residual < 1e-12);
    CHECK(std::fabs(o.multiplier) >= 1.0);
    CHECK(o.boundary0 < 1.0);
    CHECK(o.boundary1 < 1.0);
    double oracle = oracle_fixed_point(sys, o.base.angle, 2, 0.25, 0.75);
    CHECK(o.t == doctest::Approx(oracle).epsilon(1e-12));
    auto s = sigma_bisect(sys, *o.base.exact);
    REQUIRE(s.decided);
    CHECK(std::fabs(s.sigma - o.t) <= 1e-3);
  }
}

TEST_CASE("accepted orbits: residual, multiplier and exact cycle exponent") {
  auto sys = KanSystem::kan1994();
  for (int n = 4; n <= 6; ++n) {
    auto rep = interior_periodic_orbits(sys, n, 1000);
    CHECK(rep.orbits.size() + rep.skipped_boundary + rep.no_repelling + rep.residual_failures == rep.considered);
    for (const auto& o : rep.orbits) {
      CHECK(o.residual < 1e-12);
      CHECK(o.exponent >= 0.0);
      CHECK(o.orbit_t.size() == static_cast<std::size_t>(n));
      double cyc = exponents::cycle_exponent(sys, *o.base.exact, o.t, n);
      CHECK(cyc == doctest::Approx(o.exponent).epsilon(1e-9));
    }
  }
  CHECK(interior_periodic_orbits(sys.with_epsilon(0.0), 4, 1000).orbits.empty());
}

TEST_CASE("observables and the sigma push-forward") {
  auto obs = standard_observables();
  CHECK(obs.size() == 45);
  CHECK(obs[0].name() == "1");
  CHECK(Observable{3, true, 2}.name() == "sin3*t^2");
  CHECK(Observable{2, false, 1}(0.125, 0.5) == doctest::Approx(0.0).scale(1.0));

  SeparatingGraph g;
  for (int i = 0; i < 64; ++i) {
    SigmaSample s;
    s.theta = (i + 0.5) / 64;
    s.sigma = 0.3;
    s.decided = true;
    g.samples.push_back(s);
  }
  auto leb = GridMeasure::lebesgue(64);
  std::vector<Observable> few{{0, false, 0}, {0, false, 1}, {1, false, 1}};
  auto est = central_measure_estimate(leb, g, few);
  CHECK(est.integrals[0] == doctest::Approx(1.0));
  CHECK(est.integrals[1] == doctest::Approx(0.3));
  CHECK(est.integrals[2] == doctest::Approx(0.0).scale(1.0));
  g.samples[3].decided = false;
  CHECK_THROWS_AS(central_measure_estimate(leb, g, few), ConvergenceError);
  CHECK_THROWS_AS(central_measure_estimate(GridMeasure::lebesgue(32), g, few), PreconditionError);
}

TEST_CASE("convergence table on real orbits") {
  auto sys = KanSystem::kan1994();
  SeparatingGraph flat;
  for (int i = 0; i < 64; ++i) {
    SigmaSample s;
    s.theta = (i + 0.5) / 64;
    s.sigma = 0.5;
    s.decided = true;
    flat.samples.push_back(s);
  }
  auto obs = standard_observables();
  auto est = central_measure_estimate(GridMeasure::lebesgue(64), flat, obs);
  std::vector<OrbitReport> reps;
  for (int n = 1; n <= 6; ++n) reps.push_back(interior_periodic_orbits(sys, n, 1000));
  auto table = periodic_measure_convergence(reps, est, 2, 6);
  CHECK(table.exponents_non_negative);
  for (const auto& r : table.rows) {
    CHECK(r.orbits > 0);
    CHECK(r.gaps.size() == obs.size());
    CHECK(r.gaps[0] == doctest::Approx(0.0).scale(1.0));
  }
  for (std::size_t i = 1; i < table.rows.size(); ++i) CHECK(table.rows[i].coverage >= table.rows[i - 1].coverage);
  std::vector<OrbitReport> none{interior_periodic_orbits(sys.with_epsilon(0.0), 4, 100)};
  CHECK(periodic_measure_convergence(none, est).rows.empty());
}
