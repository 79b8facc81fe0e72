#pragma once

#include <span>
#include <vector>

#include "kanlab/angle.hpp"

namespace kanlab {

/// Real trigonometric polynomial
///   f(x) = sum_j c_j cos(2 pi j x) + sum_j s_j sin(2 pi j x),
/// where cos_coeffs[0] is the constant term and sin_coeffs[0] is unused.
class TrigPoly {
 public:
  TrigPoly() = default;
  TrigPoly(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs);

  static TrigPoly constant(double c) { return TrigPoly({c}, {}); }
  static TrigPoly cosine(int harmonic, double amplitude = 1.0);
  static TrigPoly sine(int harmonic, double amplitude = 1.0);

  double operator()(double x) const { return value(x); }
  double value(double x) const;
  double value(RationalAngle x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

  /// sum of |coefficients|; bounds sup|f|.
  double abs_sum() const;
  /// sum of 2*pi*j*|coefficient|; bounds sup|f'|.
  double derivative_bound() const;
  int degree() const;
  bool is_zero() const;
  /// Exact Lebesgue mean (the constant term).
  double mean() const { return cos_.empty() ? 0.0 : cos_[0]; }

  const std::vector<double>& cos_coeffs() const { return cos_; }
  const std::vector<double>& sin_coeffs() const { return sin_; }

  TrigPoly scaled(double factor) const;
  TrigPoly operator+(const TrigPoly& other) const;

 private:
  std::vector<double> cos_;
  std::vector<double> sin_;
};

/// Ordinary polynomial sum_j a_j t^j.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);

  double operator()(double t) const { return value(t); }
  double value(double t) const;
  double derivative(double t) const;
  Polynomial derivative() const;
  int degree() const { return static_cast<int>(a_.size()) - 1; }
  const std::vector<double>& coeffs() const { return a_; }

 private:
  std::vector<double> a_;
};

}  // namespace kanlab
