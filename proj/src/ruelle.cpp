#include "kanlab/ruelle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kanlab/angle.hpp"
#include "kanlab/error.hpp"

namespace kanlab::ruelle {

namespace {

bool is_power_of_two(std::size_t g) { return g != 0 && (g & (g - 1)) == 0; }

double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TransferOperator::TransferOperator(const torus::ExpandingCircleMap& map, const TrigPoly& potential,
                                   std::size_t grid)
    : grid_(grid), branches_(std::abs(map.degree())) {
  if (grid < 2) throw PreconditionError("transfer operator needs at least two cells");
  const double g = static_cast<double>(grid);
  taps_.reserve(grid * static_cast<std::size_t>(branches_));
  for (std::size_t i = 0; i < grid; ++i) {
    double x = (static_cast<double>(i) + 0.5) / g;
    for (double y : torus::inverse_branches(map, x)) {
      double u = y * g - 0.5;
      double fl = std::floor(u);
      auto j0 = static_cast<long long>(fl) % static_cast<long long>(grid);
      if (j0 < 0) j0 += static_cast<long long>(grid);
      auto j1 = (j0 + 1) % static_cast<long long>(grid);
      taps_.push_back({static_cast<std::uint32_t>(j0), static_cast<std::uint32_t>(j1), u - fl,
                       std::exp(potential.value(y))});
    }
  }
}

void TransferOperator::apply(std::span<const double> f, std::span<double> out) const {
  if (f.size() != grid_ || out.size() != grid_) throw PreconditionError("transfer apply: size mismatch");
  const auto k = static_cast<std::size_t>(branches_);
  for (std::size_t i = 0; i < grid_; ++i) {
    double s = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
      const Tap& tp = taps_[i * k + b];
      double f0 = f[tp.j0];
      s += tp.weight * (f0 + tp.frac * (f[tp.j1] - f0));
    }
    out[i] = s;
  }
}

void TransferOperator::apply_adjoint(std::span<const double> m, std::span<double> out) const {
  if (m.size() != grid_ || out.size() != grid_) throw PreconditionError("adjoint apply: size mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  const auto k = static_cast<std::size_t>(branches_);
  for (std::size_t i = 0; i < grid_; ++i) {
    for (std::size_t b = 0; b < k; ++b) {
      const Tap& tp = taps_[i * k + b];
      double w = m[i] * tp.weight;
      out[tp.j0] += w * (1.0 - tp.frac);
      out[tp.j1] += w * tp.frac;
    }
  }
}

double interpolate(std::span<const double> values, double theta) {
  const auto g = values.size();
  double u = wrap01(theta) * static_cast<double>(g) - 0.5;
  double fl = std::floor(u);
  auto j0 = static_cast<long long>(fl);
  if (j0 < 0) j0 += static_cast<long long>(g);
  auto j1 = (j0 + 1) % static_cast<long long>(g);
  double f0 = values[static_cast<std::size_t>(j0)];
  return f0 + (u - fl) * (values[static_cast<std::size_t>(j1)] - f0);
}

std::vector<double> transfer_apply(const torus::ExpandingCircleMap& map, const TrigPoly& potential,
                                   std::span<const double> f) {
  TransferOperator op(map, potential, f.size());
  std::vector<double> out(f.size());
  op.apply(f, out);
  return out;
}

namespace {

// Power iteration on v -> step(v), renormalized to sum 1 each time.
template <class Step>
double power_iterate(Step step, std::vector<double>& v, SolveOptions opts, int& iterations,
                     double& residual, const char* what) {
  std::vector<double> next(v.size());
  double lam = 0.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    step(v, next);
    double s_prev = sum(v), s_next = sum(next);
    double estimate = s_next / s_prev;
    double vec_change = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      double x = next[i] / s_next;
      vec_change = std::max(vec_change, std::fabs(x - v[i] / s_prev));
      v[i] = x;
    }
    residual = std::fabs(estimate - lam);
    lam = estimate;
    iterations = it;
    if (it > 1 && residual < opts.tol && vec_change * static_cast<double>(v.size()) < 1e-10) return lam;
  }
  throw ConvergenceError(std::string(what) + ": power iteration did not converge", residual);
}

}  // namespace

EquilibriumState solve_equilibrium(const torus::ExpandingCircleMap& map, const TrigPoly& potential,
                                   std::size_t grid, SolveOptions opts) {
  if (!is_power_of_two(grid) || grid < 1024) {
    throw PreconditionError("solve_equilibrium: grid must be a power of two >= 2^10");
  }
  TransferOperator op(map, potential, grid);
  EquilibriumState st{.map = map, .potential = potential, .grid = grid};

  std::vector<double> h(grid, 1.0 / static_cast<double>(grid));
  int it_h = 0;
  double res_h = 0.0;
  double lam = power_iterate([&](const std::vector<double>& in, std::vector<double>& out) { op.apply(in, out); },
                             h, opts, it_h, res_h, "eigenfunction");

  std::vector<double> m(grid, 1.0 / static_cast<double>(grid));
  int it_m = 0;
  double res_m = 0.0;
  power_iterate([&](const std::vector<double>& in, std::vector<double>& out) { op.apply_adjoint(in, out); },
                m, opts, it_m, res_m, "conformal measure");

  double mh = 0.0;
  for (std::size_t i = 0; i < grid; ++i) mh += m[i] * h[i];
  for (double& x : h) x /= mh;
  std::vector<double> mu(grid);
  for (std::size_t i = 0; i < grid; ++i) mu[i] = m[i] * h[i];

  st.eigenvalue = lam;
  st.pressure = std::log(lam);
  st.h = std::move(h);
  st.conformal = GridMeasure(std::move(m), "conformal");
  st.measure = GridMeasure(std::move(mu), "equilibrium");
  st.iterations = std::max(it_h, it_m);
  st.residual = std::max(res_h, res_m);

  st.jacobian.resize(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    double x = st.measure.center(i);
    double j = lam * std::exp(-potential.value(x)) * interpolate(st.h, map.evaluate(x)) / st.h[i];
    if (!(j > 0.0)) throw InvariantError("solve_equilibrium: non-positive Jacobian");
    st.jacobian[i] = j;
  }
  for (std::size_t i = 0; i < grid; ++i) {
    st.holder_quotient = std::max(st.holder_quotient,
                                  std::fabs(st.jacobian[(i + 1) % grid] - st.jacobian[i]) * static_cast<double>(grid));
  }
  return st;
}

double jacobian_at(const EquilibriumState& state, double theta) { return interpolate(state.jacobian, theta); }

DistortionReport bounded_distortion_report(const EquilibriumState& state, int n_max, int samples,
                                           std::uint64_t seed) {
  if (n_max < 0 || samples < 1) throw PreconditionError("bounded_distortion_report: bad arguments");
  DistortionReport r;
  r.max_ratio.assign(static_cast<std::size_t>(n_max) + 1, 1.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int k = std::abs(state.map.degree());
  std::uniform_int_distribution<int> branch(0, k - 1);
  for (int n = 1; n <= n_max; ++n) {
    double worst = 1.0;
    for (int s = 0; s < samples; ++s) {
      double x = unit(rng), y = unit(rng);
      double log_ratio = 0.0;
      // Pull both endpoints back along the same itinerary; each pulled-back
      // point is one step earlier on its orbit.
      for (int j = 0; j < n; ++j) {
        int b = branch(rng);
        x = torus::inverse_branches(state.map, x)[static_cast<std::size_t>(b)];
        y = torus::inverse_branches(state.map, y)[static_cast<std::size_t>(b)];
        log_ratio += std::log(jacobian_at(state, x)) - std::log(jacobian_at(state, y));
      }
      worst = std::max(worst, std::exp(std::fabs(log_ratio)));
    }
    r.max_ratio[static_cast<std::size_t>(n)] = worst;
  }
  r.bound = n_max >= 1 ? 2.0 * r.max_ratio[1] : 2.0;
  r.passed = *std::max_element(r.max_ratio.begin(), r.max_ratio.end()) <= r.bound;
  return r;
}

double weak_distance(const GridMeasure& a, const GridMeasure& b) {
  double d = 0.0;
  for (int mode = 1; mode <= 8; ++mode) {
    auto c = [mode](double x) { return sincos_2pi(mode * x).cos; };
    auto s = [mode](double x) { return sincos_2pi(mode * x).sin; };
    d = std::max(d, std::fabs(a.integrate(c) - b.integrate(c)));
    d = std::max(d, std::fabs(a.integrate(s) - b.integrate(s)));
  }
  return d;
}

double oscillation(const TrigPoly& f, std::size_t grid) {
  double lo = f.value(0.0), hi = lo;
  for (std::size_t i = 1; i < grid; ++i) {
    double v = f.value(static_cast<double>(i) / static_cast<double>(grid));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

StabilityReport statistical_stability_experiment(int degree, const TrigPoly& deformation,
                                                 const TrigPoly& potential, std::size_t grid,
                                                 std::span<const double> s_values) {
  if (!(oscillation(potential) < std::log(std::abs(degree)))) {
    throw PreconditionError("statistical stability needs sup phi - inf phi < log|degree|");
  }
  auto reference = solve_equilibrium(torus::ExpandingCircleMap::linear(degree), potential, grid);
  StabilityReport r;
  for (double s : s_values) {
    auto st = solve_equilibrium(torus::ExpandingCircleMap(degree, deformation, s), potential, grid);
    r.rows.push_back({s, weak_distance(st.measure, reference.measure)});
  }
  r.decreasing = true;
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    if (!(r.rows[i].distance < r.rows[i - 1].distance)) r.decreasing = false;
  }
  return r;
}

}  // namespace kanlab::ruelle
