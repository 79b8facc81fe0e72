#include "kanlab/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "kanlab/angle.hpp"
#include "kanlab/error.hpp"
#include "kanlab/exponents.hpp"
#include "kanlab/parallel.hpp"

namespace kanlab::entropy {

std::string to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::circle:
      return "circle";
    case RegionKind::cylinder:
      return "cylinder";
    case RegionKind::fiber:
      return "fiber";
  }
  return "?";
}

namespace {

double fiber_lipschitz(const skew::KanSystem& sys) {
  return std::max(1.0, skew::verify_K2(sys, 1024, 256).max_abs_dt * 1.01);
}

std::size_t cells_for(double stretch, double eps) {
  return static_cast<std::size_t>(std::floor(4.0 * stretch / eps)) + 1;
}

// Orbit segments of all candidates in one column: theta_i, and t_i per row.
struct Column {
  std::size_t index = 0;
  std::vector<double> theta;  // length L
  std::vector<double> t0;     // admitted t0, ascending
  std::vector<double> t;      // admitted orbits, L per point
};

double sup_distance(const Column& a, const double* ta, const Column& b, const double* tb,
                    int len, bool circle, double eps) {
  double d = 0.0;
  for (int i = len - 1; i >= 0; --i) {
    double di = circle ? 0.0 : std::fabs(ta[i] - tb[i]);
    if (&a != &b) di = std::max(di, circle_distance(a.theta[i], b.theta[i]));
    if (di > eps) return di;
    d = std::max(d, di);
  }
  return d;
}

}  // namespace

CandidateGrid default_grid(const skew::KanSystem& sys, Region region, int n, double eps) {
  int steps = std::max(n, 1) - 1;
  CandidateGrid g;
  if (region.kind != RegionKind::fiber) {
    g.theta_cells = cells_for(std::pow(sys.base().expansion_upper_bound(), steps), eps);
  }
  if (region.kind != RegionKind::circle) {
    g.t_nodes = cells_for(std::pow(fiber_lipschitz(sys), steps), eps) + 1;
  }
  return g;
}

SeparatedSetEstimate separated_count(const skew::KanSystem& sys, Region region, int n, double eps,
                                     const SeparatedOptions& options) {
  if (n < 0) throw PreconditionError("separated_count: n must be >= 0");
  if (!(eps > 0.0 && eps < 0.5)) throw PreconditionError("separated_count: eps must lie in (0, 1/2)");
  CandidateGrid grid = options.grid ? *options.grid : default_grid(sys, region, n, eps);
  const bool circle = region.kind == RegionKind::circle;
  if (region.kind == RegionKind::fiber) grid.theta_cells = 1;
  if (circle) grid.t_nodes = 1;
  if (grid.theta_cells == 0 || grid.t_nodes == 0) throw PreconditionError("separated_count: empty grid");
  if (region.kind != RegionKind::fiber && !(1.0 / static_cast<double>(grid.theta_cells) < eps / 4)) {
    throw PreconditionError("separated_count: theta spacing must be below eps/4");
  }
  if (!circle && !(grid.t_nodes >= 2 && 1.0 / static_cast<double>(grid.t_nodes - 1) < eps / 4)) {
    throw PreconditionError("separated_count: t spacing must be below eps/4");
  }

  const int len = std::max(n, 1);
  const std::size_t G = grid.theta_cells;
  const auto& base = sys.base();
  const auto& fiber = sys.fiber();

  // Two orbits that stay eps-close for n steps start within eps / lambda^(n-1)
  // in theta, provided one step cannot wrap an eps-arc (eps * Lambda < 1/2).
  std::size_t window = G;
  double lmin = base.expansion_lower_bound(), lmax = base.expansion_upper_bound();
  if (lmin > 1.0 && eps * lmax < 0.5) {
    double r = eps / std::pow(lmin, len - 1);
    window = std::min(G, static_cast<std::size_t>(std::ceil(r * static_cast<double>(G))) + 1);
  }

  SeparatedSetEstimate est;
  est.n = n;
  est.epsilon = eps;
  est.region = region;
  est.grid = grid;
  est.seed = options.seed;

  std::deque<Column> recent;  // processed columns j - window .. j
  std::vector<Column> head;   // first `window` processed columns, for wrap-around
  std::vector<double> coeff(len), orbit(len);
  const std::size_t start = G > 1 ? options.seed % G : 0;

  for (std::size_t j = 0; j < G; ++j) {
    Column col;
    col.index = j;
    std::size_t c = (start + j) % G;
    double theta = region.kind == RegionKind::fiber
                       ? region.theta0
                       : (static_cast<double>(c) + 0.5) / static_cast<double>(G);
    col.theta.resize(len);
    double weight_log = 0.0;
    for (int i = 0; i < len; ++i) {
      col.theta[i] = theta;
      if (!circle && fiber.is_product()) coeff[i] = fiber.coefficient(theta);
      if (options.potential && i < n) weight_log += options.potential->value(theta);
      theta = base.evaluate(theta);
    }
    double weight = std::exp(weight_log);

    while (!recent.empty() && recent.front().index + window < j) recent.pop_front();
    recent.push_back(std::move(col));
    Column& cur = recent.back();

    for (std::size_t r = 0; r < grid.t_nodes; ++r) {
      double t = circle ? 0.0 : static_cast<double>(r) / static_cast<double>(grid.t_nodes - 1);
      double t0 = t;
      for (int i = 0; i < len; ++i) {
        orbit[i] = t;
        if (circle) continue;
        t = fiber.is_product() ? fiber.value_at(coeff[i], t) : fiber.value(cur.theta[i], t);
        t = std::clamp(t, 0.0, 1.0);
      }

      auto conflicts = [&](const Column& other) {
        auto lo = std::lower_bound(other.t0.begin(), other.t0.end(), t0 - eps);
        for (auto it = lo; it != other.t0.end() && *it <= t0 + eps; ++it) {
          const double* tb = other.t.data() + (it - other.t0.begin()) * len;
          if (sup_distance(cur, orbit.data(), other, tb, len, circle, eps) <= eps) return true;
        }
        return false;
      };

      bool clash = false;
      for (auto it = recent.rbegin(); it != recent.rend() && !clash; ++it) clash = conflicts(*it);
      // Circular neighbours across the seam: columns j near G and the first ones.
      for (std::size_t h = 0; h < head.size() && !clash; ++h) {
        std::size_t dist = G - j + head[h].index;
        if (dist <= window && head[h].index + window < j) clash = conflicts(head[h]);
      }
      if (clash) continue;

      cur.t0.push_back(t0);
      cur.t.insert(cur.t.end(), orbit.begin(), orbit.end());
      ++est.count;
      est.weight_sum += weight;
      if (options.keep_points) est.points.push_back({cur.theta[0], t0});
    }
    if (j < window) head.push_back(cur);
  }
  return est;
}

AuditReport audit_separation(const skew::KanSystem& sys, const SeparatedSetEstimate& est,
                             std::size_t exhaustive_limit, std::size_t samples,
                             std::uint64_t seed) {
  const int len = std::max(est.n, 1);
  const bool circle = est.region.kind == RegionKind::circle;
  const auto& pts = est.points;
  std::vector<skew::Point> orbits(pts.size() * len);
  for (std::size_t p = 0; p < pts.size(); ++p) {
    skew::Point x = pts[p];
    for (int i = 0; i < len; ++i) {
      orbits[p * len + i] = x;
      x = circle ? skew::Point{sys.base().evaluate(x.theta), 0.0} : sys.step(x);
    }
  }
  auto separated = [&](std::size_t a, std::size_t b) {
    for (int i = 0; i < len; ++i) {
      const auto& x = orbits[a * len + i];
      const auto& y = orbits[b * len + i];
      double d = std::max(circle_distance(x.theta, y.theta), std::fabs(x.t - y.t));
      if (d > est.epsilon) return true;
    }
    return false;
  };

  AuditReport rep;
  auto check = [&](std::size_t a, std::size_t b) {
    ++rep.pairs;
    if (!separated(a, b)) ++rep.violations;
  };
  if (pts.size() <= exhaustive_limit) {
    rep.exhaustive = true;
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = a + 1; b < pts.size(); ++b) check(a, b);
    return rep;
  }
  for (std::size_t a = 0; a + 1 < pts.size(); ++a) check(a, a + 1);
  auto rng = item_rng(seed, 0);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t a = pick(rng), b = pick(rng);
    if (a != b) check(a, b);
  }
  return rep;
}

namespace {

void check_desk_scale(Region region, int n, double eps) {
  int cap = region.kind == RegionKind::fiber ? 40 : 12;
  if (n > cap) throw PreconditionError("entropy: n above the desk-scale cap " + std::to_string(cap));
  if (eps < 0.05) throw PreconditionError("entropy: eps below the desk-scale floor 0.05");
}

}  // namespace

EntropyEstimate entropy_estimate(const skew::KanSystem& sys, Region region,
                                 std::span<const double> eps_list, int n_min, int n_max) {
  if (eps_list.empty() || n_min < 0 || n_max <= n_min) {
    throw PreconditionError("entropy_estimate: need eps values and n_min < n_max");
  }
  EntropyEstimate out;
  out.region = region;
  out.target = std::log(std::abs(static_cast<double>(sys.base().degree())));
  for (double eps : eps_list) {
    check_desk_scale(region, n_max, eps);
    std::vector<double> ns, logs;
    for (int n = n_min; n <= n_max; ++n) {
      SeparatedOptions opt;
      opt.keep_points = false;
      auto est = separated_count(sys, region, n, eps, opt);
      out.rows.push_back({eps, n, est.count});
      ns.push_back(n);
      logs.push_back(std::log(static_cast<double>(est.count)));
    }
    auto fit = exponents::least_squares(ns, logs);
    out.slopes.push_back({eps, fit.slope, fit.intercept});
  }
  auto lo = std::min_element(out.slopes.begin(), out.slopes.end(),
                             [](const auto& a, const auto& b) { return a.epsilon < b.epsilon; });
  auto hi = std::max_element(out.slopes.begin(), out.slopes.end(),
                             [](const auto& a, const auto& b) { return a.epsilon < b.epsilon; });
  out.trend = lo->slope - hi->slope;
  return out;
}

PressureEstimate pressure_estimate(const skew::KanSystem& sys, const TrigPoly& phi, int n,
                                   double eps, Region region) {
  if (n < 2) throw PreconditionError("pressure_estimate: n must be >= 2");
  check_desk_scale(region, n, eps);
  SeparatedOptions opt;
  opt.keep_points = false;
  opt.potential = &phi;
  opt.grid = default_grid(sys, region, n, eps);
  auto now = separated_count(sys, region, n, eps, opt);
  auto prev = separated_count(sys, region, n - 1, eps, opt);
  PressureEstimate p;
  p.n = n;
  p.epsilon = eps;
  p.log_sum = std::log(now.weight_sum);
  p.log_sum_prev = std::log(prev.weight_sum);
  p.raw = p.log_sum / n;
  p.increment = p.log_sum - p.log_sum_prev;
  return p;
}

FiberEntropyReport fiber_entropy_check(const skew::KanSystem& sys,
                                       std::span<const double> thetas,
                                       std::span<const int> n_values, double eps,
                                       double max_rate) {
  if (n_values.size() < 2) throw PreconditionError("fiber_entropy_check: need at least two n");
  FiberEntropyReport rep;
  rep.epsilon = eps;
  rep.passed = true;
  for (double theta : thetas) {
    FiberEntropyRow row;
    row.theta = theta;
    row.bound_ok = true;
    std::vector<double> xs, ys;
    for (int n : n_values) {
      check_desk_scale(Region::fiber(theta), n, eps);
      SeparatedOptions opt;
      opt.keep_points = false;
      auto est = separated_count(sys, Region::fiber(theta), n, eps, opt);
      row.n.push_back(n);
      row.counts.push_back(est.count);
      double bound = std::max(n, 1) * (1.0 / eps + 1.0);
      if (static_cast<double>(est.count) > bound) row.bound_ok = false;
      xs.push_back(n);
      ys.push_back(std::log(static_cast<double>(est.count)));
    }
    row.rate = exponents::least_squares(xs, ys).slope;
    rep.max_rate = std::max(rep.max_rate, row.rate);
    if (!row.bound_ok || !(row.rate < max_rate)) rep.passed = false;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace kanlab::entropy
