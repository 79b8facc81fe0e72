#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kanlab/grid_measure.hpp"
#include "kanlab/orbit.hpp"
#include "kanlab/skew.hpp"

namespace kanlab::exponents {

/// int log|d_t phi(theta, j)| dnu(theta) by the midpoint rule on nu's grid.
/// Throws InvariantError naming theta if the derivative vanishes at a node.
double boundary_exponent(const skew::KanSystem& sys, int j, const GridMeasure& nu);

enum class Method { quadrature, birkhoff };
std::string to_string(Method m);

struct ExponentReport {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  std::string measure_id;
  Method method = Method::quadrature;
  std::size_t size = 0;         // grid size, or orbit length for Birkhoff
  double std_error = 0.0;       // Birkhoff only
  double resolution0 = 0.0;     // |lambda_j(G) - lambda_j(G/2)|
  double resolution1 = 0.0;
  bool passed = false;
};

struct BirkhoffEstimate {
  double estimate = 0.0;
  double std_error = 0.0;  // from 20 batch means
  std::int64_t samples = 0;
};

/// (1/N) sum log|d_t phi| along the orbit of (theta0, t0) after burn_in steps.
BirkhoffEstimate birkhoff_central_exponent(const skew::KanSystem& sys, const BaseSeed& theta0, double t0,
                                           std::int64_t n, std::int64_t burn_in);

/// (1/n) sum over one base cycle of log|d_t phi|, starting at (theta, t).
/// For a periodic point of K this is the exact cycle mean.
double cycle_exponent(const skew::KanSystem& sys, const BaseSeed& theta, double t, int n);

/// Both boundary exponents negative with margin 3x the quadrature
/// resolution error (value at G against value at G/2).
ExponentReport check_negative_exponents(const skew::KanSystem& sys, const GridMeasure& nu);

struct EpsilonRow {
  double epsilon = 0.0;
  double lambda0 = 0.0;
  double lambda1 = 0.0;
};

struct PowerFit {
  double gamma = 0.0;       // lambda ~ -beta * eps^gamma
  double beta = 0.0;
  double beta_target = 0.0; // xi'(j)^2/2 * int C^2 dnu
  bool passed = false;      // |gamma - 2| <= 0.1 and beta within 5% of target
};

struct EpsilonScan {
  std::vector<EpsilonRow> rows;
  double coupling_mean = 0.0;  // int C dnu
  bool coupling_mean_zero = false;
  PowerFit fit0;
  PowerFit fit1;
  bool passed = false;
};

/// Boundary exponents along the product family t + eps C xi for each eps,
/// with a least-squares fit of log|lambda| against log eps.
EpsilonScan epsilon_expansion_scan(const skew::KanSystem& family, const GridMeasure& nu,
                                   std::span<const double> epsilons);

/// Least-squares slope/intercept of y against x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LineFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace kanlab::exponents
