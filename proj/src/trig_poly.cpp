#include "kanlab/trig_poly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kanlab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TrigPoly::TrigPoly(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
    : cos_(std::move(cos_coeffs)), sin_(std::move(sin_coeffs)) {
  if (!sin_.empty()) sin_[0] = 0.0;
}

TrigPoly TrigPoly::cosine(int harmonic, double amplitude) {
  std::vector<double> c(static_cast<std::size_t>(harmonic) + 1, 0.0);
  c[static_cast<std::size_t>(harmonic)] = amplitude;
  return TrigPoly(std::move(c), {});
}

TrigPoly TrigPoly::sine(int harmonic, double amplitude) {
  std::vector<double> s(static_cast<std::size_t>(harmonic) + 1, 0.0);
  s[static_cast<std::size_t>(harmonic)] = amplitude;
  return TrigPoly({}, std::move(s));
}

double TrigPoly::value(double x) const {
  double acc = cos_.empty() ? 0.0 : cos_[0];
  std::size_t n = std::max(cos_.size(), sin_.size());
  for (std::size_t j = 1; j < n; ++j) {
    SinCos sc = sincos_2pi(static_cast<double>(j) * wrap01(x));
    if (j < cos_.size()) acc += cos_[j] * sc.cos;
    if (j < sin_.size()) acc += sin_[j] * sc.sin;
  }
  return acc;
}

double TrigPoly::value(RationalAngle x) const {
  double acc = cos_.empty() ? 0.0 : cos_[0];
  std::size_t n = std::max(cos_.size(), sin_.size());
  for (std::size_t j = 1; j < n; ++j) {
    // j * num mod den stays exact for the denominators used here (< 2^40).
    std::int64_t num = (static_cast<std::int64_t>(j) * (x.num % x.den)) % x.den;
    SinCos sc = sincos_2pi(RationalAngle{num, x.den});
    if (j < cos_.size()) acc += cos_[j] * sc.cos;
    if (j < sin_.size()) acc += sin_[j] * sc.sin;
  }
  return acc;
}

double TrigPoly::derivative(double x) const {
  double acc = 0.0;
  std::size_t n = std::max(cos_.size(), sin_.size());
  for (std::size_t j = 1; j < n; ++j) {
    SinCos sc = sincos_2pi(static_cast<double>(j) * wrap01(x));
    double w = kTwoPi * static_cast<double>(j);
    if (j < cos_.size()) acc -= w * cos_[j] * sc.sin;
    if (j < sin_.size()) acc += w * sin_[j] * sc.cos;
  }
  return acc;
}

double TrigPoly::second_derivative(double x) const {
  double acc = 0.0;
  std::size_t n = std::max(cos_.size(), sin_.size());
  for (std::size_t j = 1; j < n; ++j) {
    SinCos sc = sincos_2pi(static_cast<double>(j) * wrap01(x));
    double w = kTwoPi * static_cast<double>(j);
    if (j < cos_.size()) acc -= w * w * cos_[j] * sc.cos;
    if (j < sin_.size()) acc -= w * w * sin_[j] * sc.sin;
  }
  return acc;
}

double TrigPoly::abs_sum() const {
  double s = 0.0;
  for (double c : cos_) s += std::fabs(c);
  for (double c : sin_) s += std::fabs(c);
  return s;
}

double TrigPoly::derivative_bound() const {
  double s = 0.0;
  for (std::size_t j = 1; j < cos_.size(); ++j) s += kTwoPi * j * std::fabs(cos_[j]);
  for (std::size_t j = 1; j < sin_.size(); ++j) s += kTwoPi * j * std::fabs(sin_[j]);
  return s;
}

int TrigPoly::degree() const {
  int d = 0;
  for (std::size_t j = 0; j < cos_.size(); ++j)
    if (cos_[j] != 0.0) d = std::max(d, static_cast<int>(j));
  for (std::size_t j = 1; j < sin_.size(); ++j)
    if (sin_[j] != 0.0) d = std::max(d, static_cast<int>(j));
  return d;
}

bool TrigPoly::is_zero() const {
  return std::all_of(cos_.begin(), cos_.end(), [](double c) { return c == 0.0; }) &&
         std::all_of(sin_.begin(), sin_.end(), [](double c) { return c == 0.0; });
}

TrigPoly TrigPoly::scaled(double factor) const {
  TrigPoly out = *this;
  for (double& c : out.cos_) c *= factor;
  for (double& c : out.sin_) c *= factor;
  return out;
}

TrigPoly TrigPoly::operator+(const TrigPoly& other) const {
  TrigPoly out = *this;
  out.cos_.resize(std::max(cos_.size(), other.cos_.size()), 0.0);
  out.sin_.resize(std::max(sin_.size(), other.sin_.size()), 0.0);
  for (std::size_t j = 0; j < other.cos_.size(); ++j) out.cos_[j] += other.cos_[j];
  for (std::size_t j = 0; j < other.sin_.size(); ++j) out.sin_[j] += other.sin_[j];
  return out;
}

Polynomial::Polynomial(std::vector<double> coeffs) : a_(std::move(coeffs)) {
  if (a_.empty()) a_.push_back(0.0);
}

double Polynomial::value(double t) const {
  double acc = a_.back();
  for (std::size_t j = a_.size() - 1; j-- > 0;) acc = acc * t + a_[j];
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (a_.size() <= 1) return Polynomial({0.0});
  std::vector<double> d(a_.size() - 1);
  for (std::size_t j = 1; j < a_.size(); ++j) d[j - 1] = static_cast<double>(j) * a_[j];
  return Polynomial(std::move(d));
}

double Polynomial::derivative(double t) const {
  if (a_.size() <= 1) return 0.0;
  double acc = static_cast<double>(a_.size() - 1) * a_.back();
  for (std::size_t j = a_.size() - 1; j-- > 1;) acc = acc * t + static_cast<double>(j) * a_[j];
  return acc;
}

}  // namespace kanlab
