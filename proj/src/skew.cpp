#include "kanlab/skew.hpp"

#include <algorithm>
#include <cmath>

#include "kanlab/error.hpp"
#include "kanlab/orbit.hpp"

namespace kanlab::skew {

namespace {

constexpr double kClampExcursion = 1e-12;
constexpr double kHyperbolicBand = 1e-9;

Hyperbolicity classify_slope(double slope) {
  if (std::fabs(slope) < 1.0 - kHyperbolicBand) return Hyperbolicity::sink;
  if (std::fabs(slope) > 1.0 + kHyperbolicBand) return Hyperbolicity::source;
  return Hyperbolicity::neutral;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

std::string to_string(Hyperbolicity h) {
  switch (h) {
    case Hyperbolicity::sink:
      return "sink";
    case Hyperbolicity::source:
      return "source";
    case Hyperbolicity::neutral:
      return "neutral";
  }
  return "?";
}

FiberFamily FiberFamily::product(double epsilon, TrigPoly coupling, Polynomial xi) {
  FiberFamily f;
  f.epsilon_ = epsilon;
  f.coupling_ = std::move(coupling);
  f.xi_ = std::move(xi);
  f.dxi_ = f.xi_.derivative();
  f.poly_ = kernels::make_fiber_poly(f.xi_);
  return f;
}

FiberFamily FiberFamily::general(Fn value, Fn d_dt, Fn d_dtheta) {
  if (!value || !d_dt || !d_dtheta) {
    throw PreconditionError("general fiber family needs value and both partial derivatives");
  }
  FiberFamily f;
  f.value_ = std::move(value);
  f.d_dt_ = std::move(d_dt);
  f.d_dtheta_ = std::move(d_dtheta);
  return f;
}

double FiberFamily::value_at(double e, double t) const {
  const auto& p = poly_;
  double q = 0.0;
  if (p.q_terms > 0) {
    q = p.q[p.q_terms - 1];
    for (int k = p.q_terms - 2; k >= 0; --k) q = q * t + p.q[k];
  }
  return t + ((e * t) * q + e * p.a0);
}

double FiberFamily::d_dt_at(double e, double t) const {
  const auto& p = poly_;
  double d = 0.0;
  if (p.dxi_terms > 0) {
    d = p.dxi[p.dxi_terms - 1];
    for (int k = p.dxi_terms - 2; k >= 0; --k) d = d * t + p.dxi[k];
  }
  return 1.0 + e * d;
}

double FiberFamily::value(double theta, double t) const {
  return value_ ? value_(theta, t) : value_at(coefficient(theta), t);
}

double FiberFamily::d_dt(double theta, double t) const {
  return d_dt_ ? d_dt_(theta, t) : d_dt_at(coefficient(theta), t);
}

double FiberFamily::d_dtheta(double theta, double t) const {
  if (d_dtheta_) return d_dtheta_(theta, t);
  return epsilon_ * coupling_.derivative(theta) * xi_.value(t);
}

FiberFamily FiberFamily::with_epsilon(double epsilon) const {
  if (!is_product()) throw PreconditionError("with_epsilon needs a product fiber family");
  return product(epsilon, coupling_, xi_);
}

KanSystem::KanSystem(torus::ExpandingCircleMap base, FiberFamily fiber, std::string name)
    : base_(std::move(base)), fiber_(std::move(fiber)), name_(std::move(name)) {}

KanSystem KanSystem::kan1994() {
  return KanSystem(torus::ExpandingCircleMap::linear(3),
                   FiberFamily::product(1.0 / 32.0, TrigPoly::cosine(1), Polynomial({0.0, 1.0, -1.0})),
                   "kan1994");
}

KanSystem KanSystem::with_epsilon(double epsilon) const {
  return KanSystem(base_, fiber_.with_epsilon(epsilon), name_ == "kan1994" ? "kan1994-family" : name_);
}

Point KanSystem::step(Point x) const {
  if (!(x.t >= 0.0 && x.t <= 1.0)) throw PreconditionError("step: t must lie in [0,1]");
  double t = fiber_.value(x.theta, x.t);
  if (t < 0.0 || t > 1.0) {
    double excursion = t < 0.0 ? -t : t - 1.0;
    if (excursion > kClampExcursion) {
      throw InvariantError("step: fiber map left [0,1] by " + std::to_string(excursion));
    }
    t = std::clamp(t, 0.0, 1.0);
  }
  return {base_.evaluate(x.theta), t};
}

FiberComposition::FiberComposition(const KanSystem& sys, double theta, int n) : sys_(&sys) {
  if (n < 1) throw PreconditionError("fiber_composition: n must be >= 1");
  angles_ = base_orbit(sys.base(), theta, static_cast<std::size_t>(n));
  if (sys.fiber().is_product()) coeffs_ = CouplingStream(sys, theta).take(static_cast<std::size_t>(n));
}

FiberComposition::FiberComposition(const KanSystem& sys, RationalAngle theta, int n) : sys_(&sys) {
  if (n < 1) throw PreconditionError("fiber_composition: n must be >= 1");
  angles_ = base_orbit(sys.base(), theta, static_cast<std::size_t>(n));
  if (sys.fiber().is_product()) coeffs_ = CouplingStream(sys, theta).take(static_cast<std::size_t>(n));
}

FiberComposition::Value FiberComposition::operator()(double t) const {
  const FiberFamily& f = sys_->fiber();
  double d = 1.0;
  if (f.is_product()) {
    for (double e : coeffs_) {
      d *= f.d_dt_at(e, t);
      t = f.value_at(e, t);
    }
  } else {
    for (double theta : angles_) {
      d *= f.d_dt(theta, t);
      t = f.value(theta, t);
    }
  }
  return {t, d};
}

FiberComposition fiber_composition(const KanSystem& sys, double theta, int n) {
  return FiberComposition(sys, theta, n);
}

K1Report verify_K1(const KanSystem& sys, std::size_t grid, double tolerance) {
  K1Report r;
  for (std::size_t i = 0; i < grid; ++i) {
    double theta = static_cast<double>(i) / static_cast<double>(grid);
    for (double j : {0.0, 1.0}) {
      double dev = std::fabs(sys.fiber().value(theta, j) - j);
      if (dev > r.max_deviation) {
        r.max_deviation = dev;
        r.worst_theta = theta;
      }
    }
  }
  r.passed = r.max_deviation <= tolerance;
  return r;
}

K2Report verify_K2(const KanSystem& sys, std::size_t theta_grid, std::size_t t_grid) {
  if (theta_grid < 1024 || t_grid < 256) {
    throw PreconditionError("verify_K2: grids must be at least 2^10 x 2^8");
  }
  K2Report r;
  r.threshold = 0.5 * torus::verify_expanding(sys.base(), theta_grid).min_derivative;
  for (std::size_t i = 0; i < theta_grid; ++i) {
    double theta = static_cast<double>(i) / static_cast<double>(theta_grid);
    for (std::size_t j = 0; j <= t_grid; ++j) {
      double t = static_cast<double>(j) / static_cast<double>(t_grid);
      double d = std::fabs(sys.fiber().d_dt(theta, t));
      r.max_abs_dt = std::max(r.max_abs_dt, d);
      if (d >= r.threshold && r.violations.size() < 16) r.violations.push_back({theta, t});
    }
  }
  r.passed = r.max_abs_dt < r.threshold;
  return r;
}

std::vector<double> scan_interior_fixed_points(const std::function<double(double)>& g,
                                               double slope0, double slope1, std::size_t cells,
                                               double tol, bool* degenerate,
                                               std::span<const double> node_values) {
  if (cells < 2) throw PreconditionError("scan: need at least two cells");
  if (!node_values.empty() && node_values.size() != cells + 1) {
    throw PreconditionError("scan: node_values must have cells+1 entries");
  }
  auto node = [&](std::size_t i) {
    return node_values.empty() ? g(static_cast<double>(i) / static_cast<double>(cells))
                               : node_values[i];
  };
  std::vector<double> roots;
  bool all_zero = true;
  // Signs just inside the ends follow from the end slopes: g ~ (slope0-1) t
  // near 0 and g ~ (1-slope1)(1-t) near 1.
  int last_sign = sign_of(slope0 - 1.0);
  double last_pos = 0.0;
  auto refine = [&](double lo, double hi, int sign_lo) {
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
      double mid = 0.5 * (lo + hi);
      double gm = g(mid);
      if (gm == 0.0) return mid;
      if (sign_of(gm) == sign_lo) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  for (std::size_t i = 1; i <= cells; ++i) {
    double pos = static_cast<double>(i) / static_cast<double>(cells);
    int s;
    if (i == cells) {
      s = -sign_of(slope1 - 1.0);
    } else {
      double v = node(i);
      if (v != 0.0) all_zero = false;
      s = sign_of(v);
      if (s == 0) {
        roots.push_back(pos);
        last_sign = 0;
        last_pos = pos;
        continue;
      }
    }
    if (s != 0 && last_sign != 0 && s != last_sign) roots.push_back(refine(last_pos, pos, last_sign));
    if (s != 0) {
      last_sign = s;
      last_pos = pos;
    }
  }
  if (degenerate) *degenerate = all_zero;
  if (all_zero) roots.clear();
  return roots;
}

K3Report verify_K3(const KanSystem& sys, std::size_t scan_cells) {
  K3Report r;
  auto fixed = torus::periodic_points(sys.base(), 1, 0);
  if (fixed.orbits.size() < 2) {
    r.message = "base map has fewer than two fixed points";
    return r;
  }
  for (const auto& pt : fixed.orbits) {
    FiberFixedPoints f;
    f.theta = pt.angle;
    f.slope0 = sys.fiber().d_dt(f.theta, 0.0);
    f.slope1 = sys.fiber().d_dt(f.theta, 1.0);
    f.at0 = classify_slope(f.slope0);
    f.at1 = classify_slope(f.slope1);
    const double theta = f.theta;
    auto g = [&](double t) { return sys.fiber().value(theta, t) - t; };
    f.interior = scan_interior_fixed_points(g, f.slope0, f.slope1, scan_cells, 1e-13, &f.degenerate);
    r.fibers.push_back(std::move(f));
  }
  for (const auto& f : r.fibers) {
    bool clean = !f.degenerate && f.interior.empty();
    if (!r.p && clean && f.at0 == Hyperbolicity::sink && f.at1 == Hyperbolicity::source) r.p = f.theta;
    if (!r.q && clean && f.at0 == Hyperbolicity::source && f.at1 == Hyperbolicity::sink) r.q = f.theta;
  }
  r.passed = r.p.has_value() && r.q.has_value();
  if (r.passed) {
    r.message = "heteroclinic boundary cycle found";
  } else {
    r.message = "no fixed fiber pair with exactly two hyperbolic fixed points of opposite type";
    for (const auto& f : r.fibers) {
      if (f.degenerate) r.message += "; fiber over " + std::to_string(f.theta) + " is identically fixed";
      if (!f.interior.empty()) {
        r.message += "; fiber over " + std::to_string(f.theta) + " has " +
                     std::to_string(f.interior.size()) + " interior fixed point(s)";
      }
    }
  }
  return r;
}

}  // namespace kanlab::skew
