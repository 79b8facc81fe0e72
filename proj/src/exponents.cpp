#include "kanlab/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kanlab/error.hpp"

namespace kanlab::exponents {

namespace {

constexpr int kBatches = 20;

double log_abs_dt(const skew::KanSystem& sys, double theta, double t) {
  double d = std::fabs(sys.fiber().d_dt(theta, t));
  if (d == 0.0) {
    throw InvariantError("fiber derivative vanishes at theta=" + std::to_string(theta) +
                         ", t=" + std::to_string(t));
  }
  return std::log(d);
}

GridMeasure coarsen(const GridMeasure& nu) {
  std::vector<double> w(nu.size() / 2);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = nu.weight(2 * i) + nu.weight(2 * i + 1);
  return GridMeasure(std::move(w), nu.id() + "/2");
}

}  // namespace

std::string to_string(Method m) { return m == Method::quadrature ? "quadrature" : "birkhoff"; }

double boundary_exponent(const skew::KanSystem& sys, int j, const GridMeasure& nu) {
  if (j != 0 && j != 1) throw PreconditionError("boundary_exponent: j must be 0 or 1");
  const double t = j;
  double s = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) s += nu.weight(i) * log_abs_dt(sys, nu.center(i), t);
  return s;
}

BirkhoffEstimate birkhoff_central_exponent(const skew::KanSystem& sys, const BaseSeed& theta0, double t0,
                                           std::int64_t n, std::int64_t burn_in) {
  if (n < 10000) throw PreconditionError("birkhoff_central_exponent: N must be >= 10^4");
  if (burn_in < 0) throw PreconditionError("birkhoff_central_exponent: negative burn-in");
  if (!(t0 >= 0.0 && t0 <= 1.0)) throw PreconditionError("birkhoff_central_exponent: t0 outside [0,1]");
  const auto& fiber = sys.fiber();
  std::vector<double> batch(kBatches, 0.0);
  const std::int64_t per_batch = n / kBatches;
  BirkhoffEstimate out;
  double total = 0.0;
  double t = t0;
  if (fiber.is_product()) {
    CouplingStream stream(sys, theta0);
    std::vector<double> e(4096);
    std::int64_t done = -burn_in;
    while (done < n) {
      auto chunk = static_cast<std::size_t>(std::min<std::int64_t>(static_cast<std::int64_t>(e.size()), n - done));
      stream.fill(std::span(e).first(chunk));
      for (std::size_t s = 0; s < chunk; ++s, ++done) {
        if (done >= 0) {
          double d = std::fabs(fiber.d_dt_at(e[s], t));
          if (d == 0.0) throw InvariantError("Birkhoff orbit hit a zero fiber derivative");
          double l = std::log(d);
          total += l;
          batch[static_cast<std::size_t>(std::min<std::int64_t>(done / per_batch, kBatches - 1))] += l;
        }
        t = std::clamp(fiber.value_at(e[s], t), 0.0, 1.0);
      }
    }
  } else {
    skew::Point x{seed_value(theta0), t0};
    for (std::int64_t k = -burn_in; k < n; ++k) {
      if (k >= 0) {
        double l = log_abs_dt(sys, x.theta, x.t);
        total += l;
        batch[static_cast<std::size_t>(std::min<std::int64_t>(k / per_batch, kBatches - 1))] += l;
      }
      x = sys.step(x);
    }
  }
  out.samples = n;
  out.estimate = total / static_cast<double>(n);
  // Batch sizes: the last batch takes the remainder.
  double mean = 0.0;
  std::vector<double> means(kBatches);
  for (int b = 0; b < kBatches; ++b) {
    std::int64_t size = b == kBatches - 1 ? n - per_batch * (kBatches - 1) : per_batch;
    means[static_cast<std::size_t>(b)] = batch[static_cast<std::size_t>(b)] / static_cast<double>(size);
    mean += means[static_cast<std::size_t>(b)] / kBatches;
  }
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= kBatches - 1;
  out.std_error = std::sqrt(var / kBatches);
  return out;
}

double cycle_exponent(const skew::KanSystem& sys, const BaseSeed& theta, double t, int n) {
  if (n < 1) throw PreconditionError("cycle_exponent: n must be >= 1");
  const auto& fiber = sys.fiber();
  double s = 0.0;
  if (fiber.is_product()) {
    for (double e : CouplingStream(sys, theta).take(static_cast<std::size_t>(n))) {
      s += std::log(std::fabs(fiber.d_dt_at(e, t)));
      t = fiber.value_at(e, t);
    }
  } else {
    for (double a : base_orbit(sys.base(), theta, static_cast<std::size_t>(n))) {
      s += log_abs_dt(sys, a, t);
      t = fiber.value(a, t);
    }
  }
  return s / n;
}

ExponentReport check_negative_exponents(const skew::KanSystem& sys, const GridMeasure& nu) {
  if (nu.size() < 2 || nu.size() % 2 != 0) throw PreconditionError("check_negative_exponents: grid must be even");
  ExponentReport r;
  r.measure_id = nu.id();
  r.method = Method::quadrature;
  r.size = nu.size();
  r.lambda0 = boundary_exponent(sys, 0, nu);
  r.lambda1 = boundary_exponent(sys, 1, nu);
  auto half = coarsen(nu);
  r.resolution0 = std::fabs(r.lambda0 - boundary_exponent(sys, 0, half));
  r.resolution1 = std::fabs(r.lambda1 - boundary_exponent(sys, 1, half));
  r.passed = r.lambda0 < -3.0 * r.resolution0 && r.lambda1 < -3.0 * r.resolution1 && r.lambda0 < 0.0 &&
             r.lambda1 < 0.0;
  return r;
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("least_squares: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw PreconditionError("least_squares: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

namespace {

PowerFit fit_power(const std::vector<EpsilonRow>& rows, bool top, double target) {
  PowerFit f;
  f.beta_target = target;
  std::vector<double> lx, ly;
  for (const auto& r : rows) {
    double lam = top ? r.lambda1 : r.lambda0;
    if (r.epsilon == 0.0) continue;
    if (!(lam < 0.0)) {
      f.gamma = f.beta = std::numeric_limits<double>::quiet_NaN();
      return f;
    }
    lx.push_back(std::log(std::fabs(r.epsilon)));
    ly.push_back(std::log(-lam));
  }
  if (lx.size() < 2) {
    f.gamma = f.beta = std::numeric_limits<double>::quiet_NaN();
    return f;
  }
  auto line = least_squares(lx, ly);
  f.gamma = line.slope;
  f.beta = std::exp(line.intercept);
  f.passed = std::fabs(f.gamma - 2.0) <= 0.1 && std::fabs(f.beta - target) <= 0.05 * target;
  return f;
}

}  // namespace

EpsilonScan epsilon_expansion_scan(const skew::KanSystem& family, const GridMeasure& nu,
                                   std::span<const double> epsilons) {
  const auto& fiber = family.fiber();
  if (!fiber.is_product()) throw PreconditionError("epsilon scan needs a product fiber family");
  EpsilonScan scan;
  const auto& c = fiber.coupling();
  scan.coupling_mean = nu.integrate([&](double x) { return c.value(x); });
  scan.coupling_mean_zero = std::fabs(scan.coupling_mean) <= 1e-10;
  for (double eps : epsilons) {
    auto sys = family.with_epsilon(eps);
    scan.rows.push_back({eps, boundary_exponent(sys, 0, nu), boundary_exponent(sys, 1, nu)});
  }
  double c2 = nu.integrate([&](double x) {
    double v = c.value(x);
    return v * v;
  });
  double d0 = fiber.xi().derivative(0.0), d1 = fiber.xi().derivative(1.0);
  scan.fit0 = fit_power(scan.rows, false, 0.5 * d0 * d0 * c2);
  scan.fit1 = fit_power(scan.rows, true, 0.5 * d1 * d1 * c2);
  scan.passed = scan.fit0.passed && scan.fit1.passed;
  return scan;
}

}  // namespace kanlab::exponents
