#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kanlab/skew.hpp"
#include "kanlab/trig_poly.hpp"

namespace kanlab::entropy {

enum class RegionKind { circle, cylinder, fiber };
std::string to_string(RegionKind kind);

/// circle: the base S^1 alone; cylinder: S^1 x [0,1]; fiber: {theta0} x [0,1].
struct Region {
  RegionKind kind = RegionKind::cylinder;
  double theta0 = 0.0;

  static Region circle() { return {RegionKind::circle, 0.0}; }
  static Region cylinder() { return {RegionKind::cylinder, 0.0}; }
  static Region fiber(double theta) { return {RegionKind::fiber, theta}; }
};

/// Candidates are theta = (c + 1/2)/theta_cells and t = r/(t_nodes - 1)
/// (t = 0 alone when t_nodes == 1).
struct CandidateGrid {
  std::size_t theta_cells = 1;
  std::size_t t_nodes = 1;
};

/// Grid whose neighbouring candidates are closer than eps/4 in the Bowen
/// metric d_n, using the largest base and fiber derivatives.
CandidateGrid default_grid(const skew::KanSystem& sys, Region region, int n, double eps);

struct SeparatedOptions {
  std::optional<CandidateGrid> grid;
  std::uint64_t seed = 0;     // rotates the first scanned column
  bool keep_points = true;
  const TrigPoly* potential = nullptr;  // weights e^{S_n phi}; null means weight 1
};

struct SeparatedSetEstimate {
  int n = 0;
  double epsilon = 0.0;
  std::size_t count = 0;
  Region region;
  CandidateGrid grid;
  std::uint64_t seed = 0;
  double weight_sum = 0.0;           // sum of e^{S_n phi} over the set
  std::vector<skew::Point> points;   // admission order
};

/// Greedy maximal (n, eps)-separated set: candidates are scanned column by
/// column in a fixed order and admitted iff their orbit segment is eps-apart
/// (max of circle distance and |dt|, over iterates 0..n-1) from every
/// admitted point. n = 0 is the static packing. Throws PreconditionError if
/// the plain grid spacing is not below eps/4.
SeparatedSetEstimate separated_count(const skew::KanSystem& sys, Region region, int n, double eps,
                                     const SeparatedOptions& options = {});

struct AuditReport {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  bool exhaustive = false;
};

/// Re-simulates the kept points with KanSystem::step and checks pairwise
/// separation: all pairs up to `exhaustive_limit` points, otherwise every
/// consecutive pair plus `samples` random pairs.
AuditReport audit_separation(const skew::KanSystem& sys, const SeparatedSetEstimate& est,
                             std::size_t exhaustive_limit = 500, std::size_t samples = 20000,
                             std::uint64_t seed = 0);

struct CountRow {
  double epsilon = 0.0;
  int n = 0;
  std::size_t count = 0;
};

struct EpsilonSlope {
  double epsilon = 0.0;
  double slope = 0.0;      // least squares of log count against n
  double intercept = 0.0;
};

struct EntropyEstimate {
  Region region;
  std::vector<CountRow> rows;
  std::vector<EpsilonSlope> slopes;  // in the order of the eps list
  double trend = 0.0;                // slope(smallest eps) - slope(largest eps)
  double target = 0.0;               // log |k|
};

/// Desk-scale bounds: n <= 12 (40 on a single fiber), eps >= 0.05.
EntropyEstimate entropy_estimate(const skew::KanSystem& sys, Region region,
                                 std::span<const double> eps_list, int n_min, int n_max);

struct PressureEstimate {
  int n = 0;
  double epsilon = 0.0;
  double log_sum = 0.0;       // log S(phi, n, eps)
  double log_sum_prev = 0.0;  // log S(phi, n-1, eps) on the same candidate grid
  double raw = 0.0;           // log_sum / n
  double increment = 0.0;     // log_sum - log_sum_prev
};

/// Separated-set pressure for a fiber-constant potential Phi(theta,t) = phi(theta).
/// Needs n >= 2.
PressureEstimate pressure_estimate(const skew::KanSystem& sys, const TrigPoly& phi, int n,
                                   double eps, Region region = Region::cylinder());

struct FiberEntropyRow {
  double theta = 0.0;
  std::vector<int> n;
  std::vector<std::size_t> counts;
  double rate = 0.0;     // least-squares slope of log count against n
  bool bound_ok = false; // count(n) <= n (1/eps + 1) for every n
};

struct FiberEntropyReport {
  double epsilon = 0.0;
  std::vector<FiberEntropyRow> rows;
  double max_rate = 0.0;
  bool passed = false;
};

/// Sub-exponential growth of separated sets inside single fibers.
FiberEntropyReport fiber_entropy_check(const skew::KanSystem& sys,
                                       std::span<const double> thetas,
                                       std::span<const int> n_values, double eps,
                                       double max_rate = 0.05);

}  // namespace kanlab::entropy
