#include "kanlab/grid_measure.hpp"

#include <algorithm>
#include <cmath>

#include "kanlab/error.hpp"

namespace kanlab {

GridMeasure::GridMeasure(std::vector<double> weights, std::string id)
    : w_(std::move(weights)), id_(std::move(id)) {
  if (w_.empty()) throw PreconditionError("grid measure needs at least one cell");
  double total = 0.0;
  for (double x : w_) {
    if (!std::isfinite(x) || x < 0.0) throw PreconditionError("grid measure weights must be finite and >= 0");
    total += x;
  }
  if (!(total > 0.0)) throw PreconditionError("grid measure has zero mass");
  for (double& x : w_) x /= total;
}

GridMeasure GridMeasure::lebesgue(std::size_t grid) {
  return GridMeasure(std::vector<double>(grid, 1.0), "lebesgue");
}

double GridMeasure::integrate_values(std::span<const double> values) const {
  if (values.size() != w_.size()) throw PreconditionError("integrate_values: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * values[i];
  return s;
}

double GridMeasure::arc_mass(double a, double b) const {
  if (b < a) throw PreconditionError("arc_mass: b < a");
  if (b - a >= 1.0) return 1.0;
  const double g = static_cast<double>(w_.size());
  double shift = std::floor(a);
  double lo = (a - shift) * g, hi = (b - shift) * g;
  double mass = 0.0;
  auto first = static_cast<long long>(std::floor(lo));
  auto last = static_cast<long long>(std::floor(hi));
  const auto n = static_cast<long long>(w_.size());
  for (long long c = first; c <= last; ++c) {
    double overlap = std::min(hi, static_cast<double>(c + 1)) - std::max(lo, static_cast<double>(c));
    if (overlap > 0.0) mass += overlap * w_[static_cast<std::size_t>(((c % n) + n) % n)];
  }
  return mass;
}

}  // namespace kanlab
