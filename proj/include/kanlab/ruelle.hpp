#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kanlab/grid_measure.hpp"
#include "kanlab/torus_dynamics.hpp"
#include "kanlab/trig_poly.hpp"

namespace kanlab::ruelle {

/// (Lf)(x) = sum over E(y) = x of exp(phi(y)) f(y), discretized on the cell
/// centers (i+1/2)/G with f linearly interpolated between centers.
class TransferOperator {
 public:
  TransferOperator(const torus::ExpandingCircleMap& map, const TrigPoly& potential, std::size_t grid);

  std::size_t grid() const { return grid_; }
  int branches() const { return branches_; }

  void apply(std::span<const double> f, std::span<double> out) const;
  /// Transpose of apply: sum_i m_i (Lf)_i == sum_j (L^T m)_j f_j.
  void apply_adjoint(std::span<const double> m, std::span<double> out) const;

 private:
  struct Tap {
    std::uint32_t j0;
    std::uint32_t j1;
    double frac;
    double weight;
  };
  std::size_t grid_;
  int branches_;
  std::vector<Tap> taps_;  // grid_ * branches_, row-major by target cell
};

/// Interpolate cell-center samples at an arbitrary angle (periodic).
double interpolate(std::span<const double> values, double theta);

/// L applied to samples of f at the cell centers.
std::vector<double> transfer_apply(const torus::ExpandingCircleMap& map, const TrigPoly& potential,
                                   std::span<const double> f);

struct EquilibriumState {
  torus::ExpandingCircleMap map;
  TrigPoly potential;
  std::size_t grid = 0;
  double eigenvalue = 0.0;
  double pressure = 0.0;           // log eigenvalue
  std::vector<double> h{};         // L h = eigenvalue * h
  GridMeasure conformal{};         // L^T m = eigenvalue * m
  GridMeasure measure{};           // equilibrium state h*m, sums to 1
  std::vector<double> jacobian{};  // Jacobian of the equilibrium state at cell centers
  double holder_quotient = 0.0;    // max |J_i - J_{i+1}| * G; empirical, uncertified
  int iterations = 0;
  double residual = 0.0;           // last eigenvalue change
};

struct SolveOptions {
  double tol = 1e-12;
  int max_iter = 100000;
};

/// Power iteration for h and for the conformal measure m; normalized so that
/// m sums to 1 and sum m_i h_i = 1. Throws ConvergenceError with the last
/// residual if max_iter is reached.
EquilibriumState solve_equilibrium(const torus::ExpandingCircleMap& map, const TrigPoly& potential,
                                   std::size_t grid, SolveOptions opts = {});

/// Jacobian of the equilibrium state interpolated at theta.
double jacobian_at(const EquilibriumState& state, double theta);

struct DistortionReport {
  std::vector<double> max_ratio;  // index n = 0..n_max; entry 0 is 1
  double bound = 0.0;             // 2 * max_ratio[1]
  bool passed = false;
};

/// Pairs x, y drawn in the same n-cylinder (common inverse-branch itinerary);
/// ratio of Jacobian products along n steps, max of r and 1/r over samples.
DistortionReport bounded_distortion_report(const EquilibriumState& state, int n_max, int samples,
                                           std::uint64_t seed);

struct StabilityRow {
  double s = 0.0;
  double distance = 0.0;
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  bool decreasing = false;
};

/// max over Fourier modes 1..8 (cos and sin) of |int g dnu_a - int g dnu_b|.
double weak_distance(const GridMeasure& a, const GridMeasure& b);

/// Equilibrium states of E_s = degree*theta + s*deformation(theta) compared
/// with s = 0. Requires sup phi - inf phi < log|degree|.
StabilityReport statistical_stability_experiment(int degree, const TrigPoly& deformation,
                                                 const TrigPoly& potential, std::size_t grid,
                                                 std::span<const double> s_values);

/// Sup minus inf of a trig polynomial, sampled on a fine grid.
double oscillation(const TrigPoly& f, std::size_t grid = 1 << 14);

}  // namespace kanlab::ruelle
