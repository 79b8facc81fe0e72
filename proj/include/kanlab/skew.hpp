#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kanlab/kernels.hpp"
#include "kanlab/torus_dynamics.hpp"
#include "kanlab/trig_poly.hpp"

namespace kanlab::skew {

struct Point {
  double theta = 0.0;
  double t = 0.0;
};

/// Fiber maps phi(theta, .) : [0,1] -> [0,1].
///
/// The product form phi(theta,t) = t + epsilon*C(theta)*xi(t) is what the
/// configuration files describe and what the SIMD kernels run. A general
/// family needs closed-form partial derivatives.
class FiberFamily {
 public:
  using Fn = std::function<double(double theta, double t)>;

  static FiberFamily product(double epsilon, TrigPoly coupling, Polynomial xi);
  static FiberFamily general(Fn value, Fn d_dt, Fn d_dtheta);

  bool is_product() const { return !value_; }
  double epsilon() const { return epsilon_; }
  const TrigPoly& coupling() const { return coupling_; }
  const Polynomial& xi() const { return xi_; }
  const kernels::FiberPoly& kernel_poly() const { return poly_; }

  /// epsilon * C(theta): the per-step coefficient fed to the kernels.
  double coefficient(double theta) const { return epsilon_ * coupling_.value(theta); }
  double coefficient(RationalAngle theta) const { return epsilon_ * coupling_.value(theta); }

  double value(double theta, double t) const;
  double d_dt(double theta, double t) const;
  double d_dtheta(double theta, double t) const;

  // Product form only: evaluation from a precomputed coefficient.
  double value_at(double coefficient, double t) const;
  double d_dt_at(double coefficient, double t) const;

  FiberFamily with_epsilon(double epsilon) const;

 private:
  double epsilon_ = 0.0;
  TrigPoly coupling_;
  Polynomial xi_{{0.0}};
  Polynomial dxi_{{0.0}};
  kernels::FiberPoly poly_{};
  Fn value_, d_dt_, d_dtheta_;
};

/// K(theta,t) = (E(theta), phi(theta,t)) on S^1 x [0,1].
class KanSystem {
 public:
  KanSystem(torus::ExpandingCircleMap base, FiberFamily fiber, std::string name = "custom");

  /// K(theta,t) = (3 theta mod 1, t + cos(2 pi theta) (t/32) (1-t)).
  static KanSystem kan1994();

  const torus::ExpandingCircleMap& base() const { return base_; }
  const FiberFamily& fiber() const { return fiber_; }
  const std::string& name() const { return name_; }

  /// One application of K. Rounding excursions outside [0,1] up to 1e-12
  /// are clamped; larger ones throw InvariantError.
  Point step(Point x) const;

  KanSystem with_epsilon(double epsilon) const;

 private:
  torus::ExpandingCircleMap base_;
  FiberFamily fiber_;
  std::string name_;
};

/// t -> second coordinate of K^n(theta, t), with its t-derivative.
class FiberComposition {
 public:
  struct Value {
    double value;
    double derivative;
  };

  FiberComposition(const KanSystem& sys, double theta, int n);
  FiberComposition(const KanSystem& sys, RationalAngle theta, int n);

  Value operator()(double t) const;
  int length() const { return static_cast<int>(angles_.size()); }
  const std::vector<double>& angles() const { return angles_; }
  /// epsilon*C along the base orbit (product families).
  const std::vector<double>& coefficients() const { return coeffs_; }

 private:
  const KanSystem* sys_;
  std::vector<double> angles_;
  std::vector<double> coeffs_;
};

FiberComposition fiber_composition(const KanSystem& sys, double theta, int n);

struct K1Report {
  double max_deviation = 0.0;  // max |phi(theta,j) - j|
  double worst_theta = 0.0;
  bool passed = false;
};

/// Boundary invariance on a uniform theta grid; exact (tolerance 0) by default.
K1Report verify_K1(const KanSystem& sys, std::size_t grid, double tolerance = 0.0);

struct K2Report {
  double max_abs_dt = 0.0;
  double threshold = 0.0;  // half of min |E'|
  bool passed = false;
  std::vector<Point> violations;  // first few offending grid points
};

/// Partial hyperbolicity: max |d_t phi| < min|E'|/2 on a theta x t grid.
K2Report verify_K2(const KanSystem& sys, std::size_t theta_grid, std::size_t t_grid);

enum class Hyperbolicity { sink, source, neutral };
std::string to_string(Hyperbolicity h);

struct FiberFixedPoints {
  double theta = 0.0;
  Hyperbolicity at0 = Hyperbolicity::neutral;
  Hyperbolicity at1 = Hyperbolicity::neutral;
  double slope0 = 1.0;
  double slope1 = 1.0;
  std::vector<double> interior;  // interior fixed points found by the scan
  bool degenerate = false;       // phi(theta,.) - t vanishes on the whole scan
};

struct K3Report {
  std::optional<double> p;  // t=0 sink, t=1 source
  std::optional<double> q;  // t=0 source, t=1 sink
  std::vector<FiberFixedPoints> fibers;  // one per fixed point of E
  bool passed = false;
  std::string message;
};

K3Report verify_K3(const KanSystem& sys, std::size_t scan_cells = 4096);

/// Interior zeros of phi(theta,.) - t (or of a composition) by sign scan
/// on `cells` uniform cells and bisection to `tol`. slope0/slope1 are the
/// derivatives at t=0 and t=1; they fix the sign of g just inside the ends.
/// node_values, when given, must hold g at the cells+1 nodes i/cells.
std::vector<double> scan_interior_fixed_points(const std::function<double(double)>& g,
                                               double slope0, double slope1, std::size_t cells,
                                               double tol, bool* degenerate = nullptr,
                                               std::span<const double> node_values = {});

}  // namespace kanlab::skew
