#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kanlab/kernels.hpp"
#include "kanlab/orbit.hpp"
#include "kanlab/skew.hpp"

namespace kanlab::basins {

using kernels::Label;

struct ClassifyParams {
  std::int64_t n_max = 5000;
  double delta = 1e-6;
  std::int32_t window = 50;
};

struct Classification {
  Label label = Label::kUndecided;
  std::int64_t hit = -1;  // step at which the window closed; 0 on the boundary circles
};

/// BASIN0 once t stays below delta for `window` consecutive steps, BASIN1
/// for t above 1 - delta; UNDECIDED after n_max steps.
Classification classify(const skew::KanSystem& sys, const BaseSeed& theta, double t, ClassifyParams params);

/// Classify many fiber coordinates over one base angle (one shared coupling
/// sequence). Equivalent to calling classify for each t, bit for bit.
std::vector<Classification> classify_fiber(const skew::KanSystem& sys, const BaseSeed& theta,
                                           std::span<const double> t, ClassifyParams params);

/// Same rule driven by a precomputed coupling sequence; runs for
/// min(params.n_max, coeffs.size()) steps.
std::vector<Classification> classify_coeffs(const kernels::FiberPoly& poly, std::span<const double> coeffs,
                                            std::span<const double> t, ClassifyParams params);

struct Fractions {
  double basin0 = 0.0;
  double basin1 = 0.0;
  double undecided = 0.0;
};

/// W x H labels; column c samples theta = (c + 1/2)/W, row r samples
/// t = 1 - (r + 1/2)/H (row 0 on top, as in the image).
struct BasinRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  ClassifyParams params;
  std::vector<std::int8_t> labels;  // row-major
  std::vector<std::int64_t> hits;
  Fractions fractions;

  Label at(std::size_t col, std::size_t row) const {
    return static_cast<Label>(labels[row * width + col]);
  }
  double theta(std::size_t col) const { return (static_cast<double>(col) + 0.5) / static_cast<double>(width); }
  double t(std::size_t row) const { return 1.0 - (static_cast<double>(row) + 0.5) / static_cast<double>(height); }
};

BasinRaster raster(const skew::KanSystem& sys, std::size_t width, std::size_t height, ClassifyParams params,
                   unsigned workers = 0);

Fractions fractions(std::span<const std::int8_t> labels);

struct SymmetryReport {
  std::size_t decided = 0;
  std::size_t agreeing = 0;  // decided cells whose mirror carries the flipped label
  double agreement = 0.0;
};

/// Agreement with the involution S(theta, t) = (theta + 1/2, 1 - t) with
/// labels swapped. Needs an even width.
SymmetryReport symmetry_agreement(const BasinRaster& r);

/// Cells where two rasters agree after mapping `b` through S and swapping
/// labels (for comparing a family with its sign-flipped twin).
SymmetryReport mirrored_agreement(const BasinRaster& a, const BasinRaster& b);

struct CoarseCell {
  std::size_t cx = 0;
  std::size_t cy = 0;
  std::size_t basin0 = 0;
  std::size_t basin1 = 0;
  bool passed = false;
};

struct IntermingledReport {
  std::size_t columns = 0;
  std::size_t rows = 0;
  std::vector<CoarseCell> cells;  // interior cells only (rows touching t=0 or t=1 excluded)
  std::size_t failures = 0;
  bool passed = false;
};

/// Every coarse cell strictly inside S^1 x (0,1) must hold at least one
/// decided pixel of each label. The raster must be >= 16x finer per axis.
IntermingledReport intermingled_test(const BasinRaster& r, std::size_t columns, std::size_t rows);

struct CoveragePoint {
  std::int64_t n = 0;
  double undecided = 0.0;
};

/// Undecided fraction of `samples` seeded uniform points as a function of
/// N_max, from a single run at max(n_values).
std::vector<CoveragePoint> coverage_curve(const skew::KanSystem& sys, std::size_t samples,
                                          std::span<const std::int64_t> n_values, ClassifyParams params,
                                          std::uint64_t seed, unsigned workers = 0);

struct StabilityReport {
  std::size_t decided = 0;
  std::size_t flipped = 0;
};

/// Re-runs decided points to 2 n_max and counts those whose orbit later
/// closes the opposite window.
StabilityReport label_stability(const skew::KanSystem& sys, std::size_t samples, ClassifyParams params,
                                std::uint64_t seed, unsigned workers = 0);

}  // namespace kanlab::basins
