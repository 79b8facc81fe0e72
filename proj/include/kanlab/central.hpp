#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kanlab/basins.hpp"
#include "kanlab/grid_measure.hpp"
#include "kanlab/orbit.hpp"
#include "kanlab/skew.hpp"
#include "kanlab/torus_dynamics.hpp"

namespace kanlab::central {

enum class SigmaMethod { bisection, periodic_fixed_point };
std::string to_string(SigmaMethod m);

struct SigmaParams {
  basins::ClassifyParams classify{std::int64_t{1} << 20, 1e-6, 50};
  double tol = 1e-4;
  int probes = 32;    // classifications per round (multisection)
  int extension = 4;  // N_max factor for probes still undecided
};

struct SigmaSample {
  double theta = 0.0;
  double sigma = 0.0;  // midpoint of [lo, hi]
  double lo = 0.0;     // largest probe seen in BASIN0
  double hi = 1.0;     // smallest probe seen in BASIN1
  SigmaMethod method = SigmaMethod::bisection;
  bool decided = false;
  bool extended = false;     // some probe needed the N_max extension
  bool non_monotone = false; // a BASIN0 probe was seen above a BASIN1 probe
};

/// Locates sigma(theta), the boundary between the stable intervals [0, sigma)
/// and (sigma, 1], by repeated multisection of the basin classifier. Throws
/// PreconditionError if t=delta and t=1-delta do not classify as BASIN0 and
/// BASIN1 even after the extension.
SigmaSample sigma_bisect(const skew::KanSystem& sys, const BaseSeed& theta, const SigmaParams& params = {});

struct SeparatingGraph {
  std::vector<SigmaSample> samples;  // theta_i = (i + 1/2)/G
  SigmaParams params;
  std::size_t decided() const;
};

SeparatingGraph separating_graph(const skew::KanSystem& sys, std::size_t grid, const SigmaParams& params,
                                 unsigned workers = 0);

/// Sum of |sigma_{i+1} - sigma_i| over consecutive decided samples.
double total_variation(const SeparatingGraph& g);

struct SymmetryStats {
  std::size_t pairs = 0;  // decided (theta, theta + 1/2) pairs
  std::size_t within = 0; // |sigma + sigma' - 1| <= bound
  double max_defect = 0.0;
};
SymmetryStats sigma_symmetry(const SeparatingGraph& g, double bound);

struct InteriorPeriodicOrbit {
  torus::PeriodicPoint base;
  double t = 0.0;               // fixed point of phi^n over base.angle
  double multiplier = 0.0;      // (phi^n)'(t)
  double boundary0 = 0.0;       // (phi^n)'(0)
  double boundary1 = 0.0;       // (phi^n)'(1)
  double residual = 0.0;        // |phi^n(t) - t|
  double exponent = 0.0;        // log|multiplier| / n
  std::vector<double> orbit_t;  // fiber coordinates along the cycle
  std::vector<double> alternates;
  std::optional<double> sigma;  // set when sigma was used to choose among several
};

struct OrbitReport {
  int n = 0;
  std::size_t considered = 0;
  std::size_t skipped_boundary = 0;   // boundary multipliers not both < 1
  std::size_t no_repelling = 0;       // interior zeros found, none with |multiplier| >= 1
  std::size_t residual_failures = 0;  // chosen zero misses the 1e-12 residual
  std::vector<InteriorPeriodicOrbit> orbits;
};

/// Interior fixed points of phi^n over primitive period-n base orbits (at
/// most `cap` orbits, stride-sampled). Requires a linear base map.
OrbitReport interior_periodic_orbits(const skew::KanSystem& sys, int n, std::size_t cap,
                                     const SigmaParams& sigma_params = {}, unsigned workers = 0);

/// f(theta) * t^degree with f = 1, cos(2 pi m theta) or sin(2 pi m theta).
struct Observable {
  int mode = 0;  // 0: constant
  bool sine = false;
  int degree = 0;
  double operator()(double theta, double t) const;
  std::string name() const;
};

/// f in {1, cos/sin 2 pi m theta : m <= 4} times t^d for d <= 4.
std::vector<Observable> standard_observables();

struct CentralEstimate {
  std::vector<Observable> observables;
  std::vector<double> integrals;
  double excluded_mass = 0.0;  // nu-mass of undecided sigma samples
};

/// int Phi(theta, sigma(theta)) dnu over the decided samples (renormalized);
/// throws ConvergenceError if the excluded mass exceeds 1%.
CentralEstimate central_measure_estimate(const GridMeasure& nu, const SeparatingGraph& g,
                                         std::span<const Observable> observables);

struct ConvergenceRow {
  int n = 0;
  std::size_t orbits = 0;
  std::vector<double> gaps;  // per observable
  double mean_gap = 0.0;
  double max_gap = 0.0;
  double mean_exponent = 0.0;
  double min_exponent = 0.0;
  double coverage = 0.0;     // cumulative share of the 32x16 grid visited
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double gap_slope = 0.0;          // least-squares slope of mean_gap over the trend window
  bool gaps_non_increasing = false;
  bool exponents_non_negative = false;
  std::optional<int> positive_from; // smallest n from which every mean exponent is > 0
};

/// Orbit-averaged observables per period against the sigma push-forward.
/// The gap trend is fitted over rows with trend_from <= n <= trend_to.
ConvergenceTable periodic_measure_convergence(std::span<const OrbitReport> reports, const CentralEstimate& est,
                                              int trend_from = 4, int trend_to = 12);

}  // namespace kanlab::central
