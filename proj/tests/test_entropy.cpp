#include <cmath>

#include "doctest.h"
#include "kanlab/angle.hpp"
#include "kanlab/entropy.hpp"
#include "kanlab/error.hpp"
#include "kanlab/ruelle.hpp"

using namespace kanlab;
using namespace kanlab::entropy;
using skew::KanSystem;

namespace {

// Plain O(s^2) greedy over the same candidate order, no Bowen window.
std::size_t brute_greedy(const KanSystem& sys, Region region, int n, double eps, CandidateGrid g) {
  int len = std::max(n, 1);
  bool circle = region.kind == RegionKind::circle;
  std::size_t cols = region.kind == RegionKind::fiber ? 1 : g.theta_cells;
  std::size_t rows = circle ? 1 : g.t_nodes;
  std::vector<std::vector<skew::Point>> kept;
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      skew::Point x{region.kind == RegionKind::fiber ? region.theta0 : (c + 0.5) / cols,
                    circle ? 0.0 : double(r) / double(rows - 1)};
      std::vector<skew::Point> orb;
      for (int i = 0; i < len; ++i) {
        orb.push_back(x);
        x = circle ? skew::Point{sys.base()(x.theta), 0.0} : sys.step(x);
      }
      bool ok = true;
      for (const auto& o : kept) {
        double d = 0;
        for (int i = 0; i < len; ++i)
          d = std::max({d, circle_distance(o[i].theta, orb[i].theta), std::fabs(o[i].t - orb[i].t)});
        if (d <= eps) {
          ok = false;
          break;
        }
      }
      if (ok) kept.push_back(orb);
    }
  }
  return kept.size();
}

}  // namespace

TEST_CASE("static packing of the unit interval") {
  auto sys = KanSystem::kan1994();
  auto est = separated_count(sys, Region::fiber(0.3), 0, 0.1);
  CHECK(est.count >= 9);
  CHECK(est.count <= 11);
  CHECK(separated_count(sys, Region::fiber(0.3), 1, 0.1).count <= 11);
}

TEST_CASE("windowed greedy agrees with the brute-force greedy") {
  auto sys = KanSystem::kan1994();
  for (int n : {1, 2, 3, 4}) {
    for (auto region : {Region::circle(), Region::cylinder(), Region::fiber(0.2)}) {
      auto g = default_grid(sys, region, n, 0.2);
      auto est = separated_count(sys, region, n, 0.2);
      CHECK(est.count == brute_greedy(sys, region, n, 0.2, g));
    }
  }
}

TEST_CASE("seam handling with a rotated scan") {
  auto sys = KanSystem::kan1994();
  SeparatedOptions opt;
  opt.seed = 12345;
  auto est = separated_count(sys, Region::cylinder(), 5, 0.1, opt);
  auto audit = audit_separation(sys, est, 500, 50000, 7);
  CHECK(audit.violations == 0);
  CHECK(audit.pairs > 0);
}

TEST_CASE("post-hoc audit finds every returned set separated") {
  auto sys = KanSystem::kan1994();
  for (int n : {0, 3, 6}) {
    for (auto region : {Region::circle(), Region::cylinder(), Region::fiber(0.7)}) {
      auto est = separated_count(sys, region, n, 0.1);
      REQUIRE(est.points.size() == est.count);
      auto audit = audit_separation(sys, est);
      CHECK(audit.violations == 0);
    }
  }
  auto small = separated_count(sys, Region::fiber(0.7), 5, 0.1);
  CHECK(audit_separation(sys, small).exhaustive);
}

TEST_CASE("counts are monotone in n and in eps") {
  auto sys = KanSystem::kan1994();
  CandidateGrid fixed{4000, 200};
  SeparatedOptions opt;
  opt.grid = fixed;
  opt.keep_points = false;
  std::size_t prev = 0;
  for (int n = 1; n <= 5; ++n) {
    auto c = separated_count(sys, Region::cylinder(), n, 0.1, opt).count;
    CHECK(c >= prev);
    prev = c;
  }
  std::size_t coarse = separated_count(sys, Region::cylinder(), 4, 0.2, opt).count;
  std::size_t fine = separated_count(sys, Region::cylinder(), 4, 0.1, opt).count;
  CHECK(fine >= coarse);
}

TEST_CASE("base entropy is log 3") {
  auto sys = KanSystem::kan1994();
  std::vector<double> eps{0.1};
  auto est = entropy_estimate(sys, Region::circle(), eps, 1, 8);
  REQUIRE(est.slopes.size() == 1);
  CHECK(std::fabs(est.slopes[0].slope - std::log(3.0)) < 0.15 * std::log(3.0));
  CHECK(est.target == doctest::Approx(std::log(3.0)));
}

TEST_CASE("full system entropy matches the base") {
  auto sys = KanSystem::kan1994();
  std::vector<double> eps{0.1, 0.2};
  auto base = entropy_estimate(sys, Region::circle(), eps, 3, 7);
  auto full = entropy_estimate(sys, Region::cylinder(), eps, 3, 7);
  for (std::size_t i = 0; i < eps.size(); ++i) {
    CHECK(std::fabs(full.slopes[i].slope - std::log(3.0)) < 0.15 * std::log(3.0));
    CHECK(std::fabs(full.slopes[i].slope - base.slopes[i].slope) < 0.1);
  }
  auto flat = entropy_estimate(sys.with_epsilon(0.0), Region::cylinder(), eps, 3, 7);
  for (std::size_t i = 0; i < eps.size(); ++i)
    CHECK(flat.slopes[i].slope == doctest::Approx(base.slopes[i].slope).epsilon(1e-9));
  CHECK_THROWS_AS(entropy_estimate(sys, Region::cylinder(), eps, 3, 13), PreconditionError);
  std::vector<double> tiny{0.01};
  CHECK_THROWS_AS(entropy_estimate(sys, Region::cylinder(), tiny, 3, 5), PreconditionError);
}

TEST_CASE("pressure: weights, zero potential and the transfer operator") {
  auto sys = KanSystem::kan1994();
  auto zero = pressure_estimate(sys, TrigPoly(), 6, 0.1);
  SeparatedOptions opt;
  opt.grid = default_grid(sys, Region::cylinder(), 6, 0.1);
  auto c6 = separated_count(sys, Region::cylinder(), 6, 0.1, opt).count;
  auto c5 = separated_count(sys, Region::cylinder(), 5, 0.1, opt).count;
  CHECK(zero.raw == std::log(static_cast<double>(c6)) / 6);
  CHECK(zero.increment == std::log(static_cast<double>(c6)) - std::log(static_cast<double>(c5)));
  CHECK(std::fabs(zero.increment - std::log(3.0)) < 0.15);

  auto shifted = pressure_estimate(sys, TrigPoly::constant(0.3), 6, 0.1);
  CHECK(shifted.raw == doctest::Approx(zero.raw + 0.3).epsilon(1e-12));
  CHECK(shifted.increment == doctest::Approx(zero.increment + 0.3).epsilon(1e-12));

  auto phi = TrigPoly::cosine(1, 0.2);
  auto sep = pressure_estimate(sys, phi, 6, 0.1);
  auto eq = ruelle::solve_equilibrium(sys.base(), phi, 1024);
  CHECK(std::fabs(sep.increment - eq.pressure) < 0.15);
  CHECK_THROWS_AS(pressure_estimate(sys, phi, 1, 0.1), PreconditionError);
}

TEST_CASE("fiber entropy vanishes") {
  auto sys = KanSystem::kan1994();
  std::vector<double> thetas;
  for (int i = 0; i < 16; ++i) thetas.push_back(std::fmod(0.1234 + 0.61803398875 * i, 1.0));
  std::vector<int> ns;
  for (int n = 1; n <= 40; n += 3) ns.push_back(n);
  auto rep = fiber_entropy_check(sys, thetas, ns, 0.05);
  CHECK(rep.passed);
  CHECK(rep.rows.size() == 16);
  for (const auto& row : rep.rows) {
    CHECK(row.bound_ok);
    CHECK(row.counts[0] <= 21);
  }
  CHECK(rep.max_rate < 0.05);
}

TEST_CASE("grid spacing precondition") {
  auto sys = KanSystem::kan1994();
  SeparatedOptions opt;
  opt.grid = CandidateGrid{40, 200};
  CHECK_THROWS_AS(separated_count(sys, Region::cylinder(), 2, 0.1, opt), PreconditionError);
  opt.grid = CandidateGrid{400, 20};
  CHECK_THROWS_AS(separated_count(sys, Region::cylinder(), 2, 0.1, opt), PreconditionError);
}
