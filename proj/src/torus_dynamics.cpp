#include "kanlab/torus_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <string>

#include "kanlab/error.hpp"

namespace kanlab::torus {

namespace {

constexpr double kNewtonTol = 1e-13;
constexpr int kNewtonMaxIter = 60;
constexpr double kBranchResidual = 1e-12;

std::int64_t checked_power(int base, int n) {
  std::int64_t b = std::llabs(base);
  std::int64_t out = 1;
  for (int i = 0; i < n; ++i) {
    if (out > (std::numeric_limits<std::int64_t>::max() >> 2) / b) {
      throw PreconditionError("periodic_points: |k|^n exceeds 64-bit range");
    }
    out *= b;
  }
  return (base < 0 && (n % 2 == 1)) ? -out : out;
}

__extension__ using wide_int = __int128;

std::int64_t mod_positive(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

// Root of f on [lo, hi] given opposite signs at the ends.
template <class F>
double bisect(F&& f, double lo, double hi, double tol) {
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ExpandingCircleMap::ExpandingCircleMap(int degree, TrigPoly perturbation, double amplitude)
    : degree_(degree), u_(std::move(perturbation)), amplitude_(amplitude) {
  if (std::abs(degree) < 2) throw PreconditionError("ExpandingCircleMap: |degree| must be >= 2");
  if (amplitude < 0.0) throw PreconditionError("ExpandingCircleMap: amplitude must be >= 0");
}

double ExpandingCircleMap::lift(double x) const {
  double v = static_cast<double>(degree_) * x;
  if (!is_linear()) v += amplitude_ * u_.value(x);
  return v;
}

double ExpandingCircleMap::evaluate(double theta) const { return wrap01(lift(theta)); }

double ExpandingCircleMap::derivative(double theta) const {
  double d = static_cast<double>(degree_);
  if (!is_linear()) d += amplitude_ * u_.derivative(theta);
  return d;
}

RationalAngle ExpandingCircleMap::evaluate(RationalAngle theta) const {
  if (!is_linear()) throw PreconditionError("exact rational evaluation needs a linear map");
  auto num = static_cast<wide_int>(theta.num % theta.den) * degree_;
  return {mod_positive(static_cast<std::int64_t>(num % theta.den), theta.den), theta.den};
}

double ExpandingCircleMap::expansion_lower_bound() const {
  return std::abs(degree_) - (is_linear() ? 0.0 : amplitude_ * u_.derivative_bound());
}

double ExpandingCircleMap::expansion_upper_bound() const {
  return std::abs(degree_) + (is_linear() ? 0.0 : amplitude_ * u_.derivative_bound());
}

std::vector<double> inverse_branches(const ExpandingCircleMap& map, double theta) {
  const int k = map.degree();
  const int count = std::abs(k);
  const double kd = static_cast<double>(k);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    double target = theta + static_cast<double>(i);
    double y0 = target / kd;
    if (map.is_linear()) {
      out[static_cast<std::size_t>(i)] = wrap01(y0);
      continue;
    }
    auto f = [&](double y) { return map.lift(y) - target; };
    double radius = map.amplitude() * map.perturbation().abs_sum() / std::fabs(kd) + 1e-12;
    double lo = y0 - radius, hi = y0 + radius;
    double y = y0;
    bool converged = false;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      double dy = f(y) / map.derivative(y);
      y -= dy;
      if (!(y >= lo && y <= hi)) break;
      if (std::fabs(dy) < kNewtonTol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      if ((f(lo) < 0) == (f(hi) < 0)) {
        throw ConvergenceError("inverse_branches: no bracket on branch " + std::to_string(i),
                               std::fabs(f(y0)));
      }
      y = bisect(f, lo, hi, 1e-15);
    }
    y = wrap01(y);
    double residual = circle_distance(map.evaluate(y), theta);
    if (residual > kBranchResidual) {
      throw ConvergenceError("inverse_branches: branch " + std::to_string(i) +
                                 " did not converge",
                             residual);
    }
    out[static_cast<std::size_t>(i)] = y;
  }
  return out;
}

namespace {

PeriodicPointReport linear_periodic_points(const ExpandingCircleMap& map, int n, std::size_t cap,
                                           bool primitive_only) {
  const int k = map.degree();
  const std::int64_t kn = checked_power(k, n);
  const std::int64_t den = std::llabs(kn - 1);
  PeriodicPointReport report;
  report.n = n;
  std::vector<std::pair<std::int64_t, int>> reps;  // (numerator, minimal period)
  for (std::int64_t j = 0; j < den; ++j) {
    std::int64_t x = j;
    int period = 0;
    bool is_rep = true;
    for (int step = 1; step <= n; ++step) {
      x = mod_positive(x * k, den);
      if (x < j) is_rep = false;
      if (x == j && period == 0) period = step;
    }
    if (x != j) throw InvariantError("periodic_points: exact fixed-point check failed");
    ++report.fixed_point_count;
    if (!is_rep) continue;
    ++report.orbit_count;
    if (primitive_only && period != n) continue;
    reps.emplace_back(j, period);
  }
  std::size_t stride = cap == 0 ? 1 : std::max<std::size_t>(1, (reps.size() + cap - 1) / cap);
  for (std::size_t r = 0; r < reps.size(); r += stride) {
    auto [j, period] = reps[r];
    PeriodicPoint pt;
    pt.exact = RationalAngle{j, den};
    pt.angle = pt.exact->value();
    pt.period = period;
    RationalAngle a = *pt.exact;
    for (int s = 0; s < period; ++s) {
      pt.orbit.push_back(a.value());
      a = map.evaluate(a);
    }
    pt.multiplier = std::pow(static_cast<double>(k), period);
    report.orbits.push_back(std::move(pt));
  }
  return report;
}

PeriodicPointReport nonlinear_periodic_points(const ExpandingCircleMap& map, int n,
                                              std::size_t cap, bool primitive_only) {
  const int k = map.degree();
  const std::int64_t kn = checked_power(k, n);
  const std::int64_t den = std::llabs(kn - 1);
  const double sign = (kn - 1) > 0 ? 1.0 : -1.0;
  PeriodicPointReport report;
  report.n = n;
  auto lift_n = [&](double x, double& deriv) {
    deriv = 1.0;
    for (int s = 0; s < n; ++s) {
      deriv *= map.derivative(x);
      x = map.lift(x);
    }
    return x;
  };
  constexpr double kKeyScale = 68719476736.0;  // 2^36
  std::map<long long, std::size_t> seen_points;
  std::map<long long, PeriodicPoint> orbits;
  for (std::int64_t j = 0; j < den; ++j) {
    double m = sign * static_cast<double>(j);
    double x = static_cast<double>(j) / static_cast<double>(den);
    bool ok = false;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      double d;
      double g = lift_n(x, d) - x - m;
      double dx = g / (d - 1.0);
      x -= dx;
      if (std::fabs(dx) < kNewtonTol) {
        ok = true;
        break;
      }
    }
    double d;
    if (!ok || std::fabs(lift_n(x, d) - x - m) > 1e-9 * std::max(1.0, std::fabs(m))) {
      ++report.refinement_failures;
      continue;
    }
    x = wrap01(x);
    long long key = std::llround(x * kKeyScale);
    if (seen_points.count(key)) continue;
    seen_points[key] = 1;
    ++report.fixed_point_count;

    PeriodicPoint pt;
    std::vector<double> orbit{x};
    double y = x;
    double mult = 1.0;
    int period = n;
    for (int s = 1; s <= n; ++s) {
      mult *= map.derivative(y);
      y = map.evaluate(y);
      if (circle_distance(y, x) < 1e-9) {
        period = s;
        break;
      }
      orbit.push_back(y);
    }
    pt.period = period;
    pt.multiplier = mult;
    auto it_min = std::min_element(orbit.begin(), orbit.end());
    std::rotate(orbit.begin(), it_min, orbit.end());
    pt.angle = orbit.front();
    pt.orbit = std::move(orbit);
    long long okey = std::llround(pt.angle * kKeyScale);
    orbits.emplace(okey, std::move(pt));
  }
  report.orbit_count = orbits.size();
  std::vector<PeriodicPoint> all;
  for (auto& [key, pt] : orbits) {
    if (primitive_only && pt.period != n) continue;
    all.push_back(std::move(pt));
  }
  std::size_t stride = cap == 0 ? 1 : std::max<std::size_t>(1, (all.size() + cap - 1) / cap);
  for (std::size_t r = 0; r < all.size(); r += stride) report.orbits.push_back(std::move(all[r]));
  return report;
}

}  // namespace

PeriodicPointReport periodic_points(const ExpandingCircleMap& map, int n, std::size_t cap,
                                    bool primitive_only) {
  if (n < 1) throw PreconditionError("periodic_points: n must be >= 1");
  return map.is_linear() ? linear_periodic_points(map, n, cap, primitive_only)
                         : nonlinear_periodic_points(map, n, cap, primitive_only);
}

ExpansionReport verify_expanding(const ExpandingCircleMap& map, std::size_t grid) {
  if (grid < 1024) throw PreconditionError("verify_expanding: grid must be >= 2^10");
  ExpansionReport r;
  r.min_derivative = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid; ++i) {
    double theta = static_cast<double>(i) / static_cast<double>(grid);
    double d = std::fabs(map.derivative(theta));
    if (d < r.min_derivative) {
      r.min_derivative = d;
      r.argmin = theta;
    }
    r.max_derivative = std::max(r.max_derivative, d);
  }
  r.passed = r.min_derivative > 1.0;
  return r;
}

double branch_separation(const ExpandingCircleMap& map, std::size_t grid) {
  double best = 1.0;
  for (std::size_t i = 0; i < grid; ++i) {
    auto ys = inverse_branches(map, static_cast<double>(i) / static_cast<double>(grid));
    std::sort(ys.begin(), ys.end());
    for (std::size_t a = 0; a < ys.size(); ++a) {
      best = std::min(best, circle_distance(ys[a], ys[(a + 1) % ys.size()]));
    }
  }
  return best;
}

}  // namespace kanlab::torus
