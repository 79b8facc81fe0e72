#include "kanlab/central.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "kanlab/error.hpp"
#include "kanlab/exponents.hpp"
#include "kanlab/parallel.hpp"

namespace kanlab::central {

namespace {

using basins::Classification;
using basins::Label;

constexpr std::size_t kScanCells = 4096;
constexpr double kRootTol = 1e-13;
constexpr double kResidualTol = 1e-12;

// Classifies fiber coordinates over one base angle, extending N_max once
// for the ones still undecided.
class Prober {
 public:
  Prober(const skew::KanSystem& sys, const BaseSeed& theta, const SigmaParams& p)
      : sys_(sys), theta_(theta), params_(p) {
    if (sys.fiber().is_product()) cache_.emplace(sys, theta);
  }

  std::vector<Label> labels(std::span<const double> ts, bool& extended) {
    auto res = run(ts, params_.classify.n_max);
    std::vector<double> again;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < res.size(); ++i) {
      if (res[i].label == Label::kUndecided) {
        again.push_back(ts[i]);
        where.push_back(i);
      }
    }
    if (!again.empty() && params_.extension > 1) {
      extended = true;
      auto more = run(again, params_.classify.n_max * params_.extension);
      for (std::size_t k = 0; k < where.size(); ++k) res[where[k]] = more[k];
    }
    std::vector<Label> out(res.size());
    for (std::size_t i = 0; i < res.size(); ++i) out[i] = res[i].label;
    return out;
  }

 private:
  std::vector<Classification> run(std::span<const double> ts, std::int64_t n_max) {
    basins::ClassifyParams p = params_.classify;
    p.n_max = n_max;
    if (cache_) {
      return basins::classify_coeffs(sys_.fiber().kernel_poly(), cache_->prefix(static_cast<std::size_t>(n_max)), ts,
                                     p);
    }
    std::vector<Classification> out;
    for (double t : ts) out.push_back(basins::classify(sys_, theta_, t, p));
    return out;
  }

  const skew::KanSystem& sys_;
  BaseSeed theta_;
  SigmaParams params_;
  std::optional<CouplingCache> cache_;
};

}  // namespace

std::string to_string(SigmaMethod m) {
  return m == SigmaMethod::bisection ? "bisection" : "periodic-fixed-point";
}

SigmaSample sigma_bisect(const skew::KanSystem& sys, const BaseSeed& theta, const SigmaParams& params) {
  if (params.probes < 1 || !(params.tol > 0.0)) throw PreconditionError("sigma_bisect: bad parameters");
  SigmaSample s;
  s.theta = seed_value(theta);
  Prober prober(sys, theta, params);
  const double delta = params.classify.delta;
  std::vector<double> ends{delta, 1.0 - delta};
  auto end_labels = prober.labels(ends, s.extended);
  if (end_labels[0] != Label::kBasin0 || end_labels[1] != Label::kBasin1) {
    throw PreconditionError("sigma_bisect: t=delta and t=1-delta do not classify as BASIN0 and BASIN1");
  }
  double lo = delta, hi = 1.0 - delta;
  const auto count = static_cast<std::size_t>(params.probes);
  std::vector<double> ts(count);
  while (hi - lo > params.tol) {
    for (std::size_t k = 0; k < count; ++k) {
      ts[k] = lo + (hi - lo) * static_cast<double>(k + 1) / static_cast<double>(count + 1);
    }
    auto labels = prober.labels(ts, s.extended);
    if (std::any_of(labels.begin(), labels.end(), [](Label l) { return l == Label::kUndecided; })) {
      s.lo = lo;
      s.hi = hi;
      s.sigma = 0.5 * (lo + hi);
      return s;
    }
    std::size_t first1 = count;
    for (std::size_t k = 0; k < count; ++k) {
      if (labels[k] == Label::kBasin1) {
        first1 = k;
        break;
      }
    }
    for (std::size_t k = first1; k < count; ++k) {
      if (labels[k] == Label::kBasin0) s.non_monotone = true;
    }
    double new_lo = first1 == 0 ? lo : ts[first1 - 1];
    double new_hi = first1 == count ? hi : ts[first1];
    lo = new_lo;
    hi = new_hi;
  }
  s.lo = lo;
  s.hi = hi;
  s.sigma = 0.5 * (lo + hi);
  s.decided = true;
  return s;
}

std::size_t SeparatingGraph::decided() const {
  return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [](const auto& s) { return s.decided; }));
}

SeparatingGraph separating_graph(const skew::KanSystem& sys, std::size_t grid, const SigmaParams& params,
                                 unsigned workers) {
  if (grid == 0) throw PreconditionError("separating_graph: empty grid");
  SeparatingGraph g;
  g.params = params;
  g.samples.resize(grid);
  parallel_for(grid, workers, [&](std::size_t i) {
    double theta = (static_cast<double>(i) + 0.5) / static_cast<double>(grid);
    try {
      g.samples[i] = sigma_bisect(sys, theta, params);
    } catch (const PreconditionError&) {
      SigmaSample s;
      s.theta = theta;
      s.sigma = 0.5;
      g.samples[i] = s;
    }
  });
  return g;
}

double total_variation(const SeparatingGraph& g) {
  double tv = 0.0;
  const SigmaSample* prev = nullptr;
  for (const auto& s : g.samples) {
    if (!s.decided) continue;
    if (prev) tv += std::fabs(s.sigma - prev->sigma);
    prev = &s;
  }
  return tv;
}

SymmetryStats sigma_symmetry(const SeparatingGraph& g, double bound) {
  SymmetryStats st;
  const std::size_t n = g.samples.size();
  if (n % 2 != 0) throw PreconditionError("sigma_symmetry: grid size must be even");
  for (std::size_t i = 0; i < n / 2; ++i) {
    const auto& a = g.samples[i];
    const auto& b = g.samples[i + n / 2];
    if (!a.decided || !b.decided) continue;
    ++st.pairs;
    double defect = std::fabs(a.sigma + b.sigma - 1.0);
    st.max_defect = std::max(st.max_defect, defect);
    if (defect <= bound) ++st.within;
  }
  return st;
}

namespace {

struct OrbitOutcome {
  enum Kind { accepted, skipped_boundary, no_repelling, residual_failure } kind = skipped_boundary;
  InteriorPeriodicOrbit orbit;
};

OrbitOutcome process_orbit(const skew::KanSystem& sys, const torus::PeriodicPoint& pt, int n,
                           const SigmaParams& sigma_params) {
  OrbitOutcome out;
  BaseSeed seed = pt.exact ? BaseSeed(*pt.exact) : BaseSeed(pt.angle);
  const auto& fiber = sys.fiber();
  auto coeffs = CouplingStream(sys, seed).take(static_cast<std::size_t>(n));
  double m0 = 1.0, m1 = 1.0;
  for (double e : coeffs) {
    m0 *= fiber.d_dt_at(e, 0.0);
    m1 *= fiber.d_dt_at(e, 1.0);
  }
  if (!(std::fabs(m0) < 1.0 && std::fabs(m1) < 1.0)) return out;

  std::vector<double> ts(kScanCells + 1), d(kScanCells + 1);
  for (std::size_t i = 0; i <= kScanCells; ++i) ts[i] = static_cast<double>(i) / kScanCells;
  std::vector<double> g = ts;
  kernels::compose(coeffs, fiber.kernel_poly(), g, d);
  for (std::size_t i = 0; i <= kScanCells; ++i) g[i] -= ts[i];

  auto comp = [&](double t) {
    double dd = 1.0;
    for (double e : coeffs) {
      dd *= fiber.d_dt_at(e, t);
      t = fiber.value_at(e, t);
    }
    return std::pair{t, dd};
  };
  auto gfun = [&](double t) { return comp(t).first - t; };
  bool degenerate = false;
  auto roots = skew::scan_interior_fixed_points(gfun, m0, m1, kScanCells, kRootTol, &degenerate, g);
  if (roots.empty()) {
    throw InvariantError("interior_periodic_orbits: boundary sinks at both ends but no interior zero over theta=" +
                         std::to_string(pt.angle));
  }
  std::vector<double> kept;
  for (double r : roots) {
    if (std::fabs(comp(r).second) >= 1.0) kept.push_back(r);
  }
  if (kept.empty()) {
    out.kind = OrbitOutcome::no_repelling;
    return out;
  }
  InteriorPeriodicOrbit o;
  std::size_t pick = 0;
  if (kept.size() > 1) {
    try {
      auto s = sigma_bisect(sys, seed, sigma_params);
      if (s.decided) {
        o.sigma = s.sigma;
        for (std::size_t k = 1; k < kept.size(); ++k) {
          if (std::fabs(kept[k] - s.sigma) < std::fabs(kept[pick] - s.sigma)) pick = k;
        }
      }
    } catch (const PreconditionError&) {
    }
  }
  for (std::size_t k = 0; k < kept.size(); ++k) {
    if (k != pick) o.alternates.push_back(kept[k]);
  }
  o.base = pt;
  o.t = kept[pick];
  auto [value, mult] = comp(o.t);
  o.multiplier = mult;
  o.residual = std::fabs(value - o.t);
  o.boundary0 = m0;
  o.boundary1 = m1;
  o.exponent = std::log(std::fabs(mult)) / n;
  double t = o.t;
  for (double e : coeffs) {
    o.orbit_t.push_back(t);
    t = fiber.value_at(e, t);
  }
  out.kind = o.residual < kResidualTol ? OrbitOutcome::accepted : OrbitOutcome::residual_failure;
  out.orbit = std::move(o);
  return out;
}

}  // namespace

OrbitReport interior_periodic_orbits(const skew::KanSystem& sys, int n, std::size_t cap,
                                     const SigmaParams& sigma_params, unsigned workers) {
  if (!sys.fiber().is_product()) throw PreconditionError("interior_periodic_orbits needs a product fiber family");
  OrbitReport rep;
  rep.n = n;
  auto pts = torus::periodic_points(sys.base(), n, cap, true);
  rep.considered = pts.orbits.size();
  std::vector<OrbitOutcome> outcomes(pts.orbits.size());
  parallel_for(pts.orbits.size(), workers,
               [&](std::size_t i) { outcomes[i] = process_orbit(sys, pts.orbits[i], n, sigma_params); });
  for (auto& o : outcomes) {
    switch (o.kind) {
      case OrbitOutcome::accepted:
        rep.orbits.push_back(std::move(o.orbit));
        break;
      case OrbitOutcome::skipped_boundary:
        ++rep.skipped_boundary;
        break;
      case OrbitOutcome::no_repelling:
        ++rep.no_repelling;
        break;
      case OrbitOutcome::residual_failure:
        ++rep.residual_failures;
        break;
    }
  }
  return rep;
}

double Observable::operator()(double theta, double t) const {
  double f = 1.0;
  if (mode > 0) {
    auto sc = sincos_2pi(wrap01(mode * theta));
    f = sine ? sc.sin : sc.cos;
  }
  double p = 1.0;
  for (int k = 0; k < degree; ++k) p *= t;
  return f * p;
}

std::string Observable::name() const {
  std::string s = mode == 0 ? "1" : (sine ? "sin" : "cos") + std::to_string(mode);
  if (degree > 0) s += "*t^" + std::to_string(degree);
  return s;
}

std::vector<Observable> standard_observables() {
  std::vector<Observable> obs;
  for (int d = 0; d <= 4; ++d) {
    obs.push_back({0, false, d});
    for (int m = 1; m <= 4; ++m) {
      obs.push_back({m, false, d});
      obs.push_back({m, true, d});
    }
  }
  return obs;
}

CentralEstimate central_measure_estimate(const GridMeasure& nu, const SeparatingGraph& g,
                                         std::span<const Observable> observables) {
  if (nu.size() != g.samples.size()) throw PreconditionError("central_measure_estimate: graph and measure grids differ");
  CentralEstimate est;
  est.observables.assign(observables.begin(), observables.end());
  est.integrals.assign(observables.size(), 0.0);
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (!g.samples[i].decided) est.excluded_mass += nu.weight(i);
  }
  if (est.excluded_mass > 0.01) {
    throw ConvergenceError("central_measure_estimate: undecided sigma samples carry more than 1% of the mass",
                           est.excluded_mass);
  }
  const double kept = 1.0 - est.excluded_mass;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const auto& s = g.samples[i];
    if (!s.decided) continue;
    double theta = nu.center(i);
    for (std::size_t k = 0; k < observables.size(); ++k) {
      est.integrals[k] += nu.weight(i) * observables[k](theta, s.sigma) / kept;
    }
  }
  return est;
}

ConvergenceTable periodic_measure_convergence(std::span<const OrbitReport> reports, const CentralEstimate& est,
                                              int trend_from, int trend_to) {
  ConvergenceTable table;
  std::vector<const OrbitReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->n < b->n; });
  std::set<int> visited;
  table.exponents_non_negative = true;
  for (const auto* rep : sorted) {
    if (rep->orbits.empty()) continue;
    ConvergenceRow row;
    row.n = rep->n;
    row.orbits = rep->orbits.size();
    std::vector<double> avg(est.observables.size(), 0.0);
    row.min_exponent = std::numeric_limits<double>::infinity();
    for (const auto& o : rep->orbits) {
      const auto len = o.orbit_t.size();
      for (std::size_t j = 0; j < len; ++j) {
        double theta = o.base.orbit[j], t = o.orbit_t[j];
        for (std::size_t k = 0; k < avg.size(); ++k) {
          avg[k] += est.observables[k](theta, t) / static_cast<double>(len * rep->orbits.size());
        }
        auto cx = std::min(31, static_cast<int>(theta * 32));
        auto cy = std::min(15, static_cast<int>(t * 16));
        visited.insert(cy * 32 + cx);
      }
      row.mean_exponent += o.exponent / static_cast<double>(rep->orbits.size());
      row.min_exponent = std::min(row.min_exponent, o.exponent);
      if (o.exponent < 0.0) table.exponents_non_negative = false;
    }
    for (std::size_t k = 0; k < avg.size(); ++k) {
      double gap = std::fabs(avg[k] - est.integrals[k]);
      row.gaps.push_back(gap);
      row.mean_gap += gap / static_cast<double>(avg.size());
      row.max_gap = std::max(row.max_gap, gap);
    }
    row.coverage = static_cast<double>(visited.size()) / (32.0 * 16.0);
    table.rows.push_back(std::move(row));
  }
  std::vector<double> x, y;
  for (const auto& r : table.rows) {
    if (r.n >= trend_from && r.n <= trend_to) {
      x.push_back(r.n);
      y.push_back(r.mean_gap);
    }
  }
  if (x.size() >= 2) {
    table.gap_slope = exponents::least_squares(x, y).slope;
    table.gaps_non_increasing = table.gap_slope <= 0.0;
  }
  for (auto it = table.rows.rbegin(); it != table.rows.rend(); ++it) {
    if (!(it->mean_exponent > 0.0)) break;
    table.positive_from = it->n;
  }
  return table;
}

}  // namespace kanlab::central
