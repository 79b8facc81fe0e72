#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace kanlab {

/// Probability measure on S^1 given by weights on G uniform cells. Cell i
/// is [i/G, (i+1)/G) and integrals use its center (i+1/2)/G.
class GridMeasure {
 public:
  GridMeasure() = default;
  /// Weights are normalized to sum 1; negative or non-finite weights throw.
  GridMeasure(std::vector<double> weights, std::string id);

  static GridMeasure lebesgue(std::size_t grid);

  std::size_t size() const { return w_.size(); }
  const std::vector<double>& weights() const { return w_; }
  double weight(std::size_t i) const { return w_[i]; }
  const std::string& id() const { return id_; }
  double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) / static_cast<double>(w_.size()); }

  /// Midpoint-rule integral of f against the weights.
  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * f(center(i));
    return s;
  }
  double integrate_values(std::span<const double> values) const;

  /// Mass of the arc [a, b) (b may exceed 1 for wrapping arcs), with
  /// partial cells counted proportionally.
  double arc_mass(double a, double b) const;

 private:
  std::vector<double> w_;
  std::string id_;
};

}  // namespace kanlab
