#include "kanlab/basins.hpp"

#include <algorithm>

#include "kanlab/error.hpp"
#include "kanlab/parallel.hpp"

namespace kanlab::basins {

namespace {

constexpr std::size_t kChunk = 1024;

Label flip(Label l) {
  if (l == Label::kBasin0) return Label::kBasin1;
  if (l == Label::kBasin1) return Label::kBasin0;
  return l;
}

void check_params(const ClassifyParams& p) {
  if (p.n_max < 0 || p.window < 1 || !(p.delta > 0.0 && p.delta < 0.5)) {
    throw PreconditionError("classify: need n_max >= 0, window >= 1, 0 < delta < 1/2");
  }
}

// Structure-of-arrays lane state for the undecided lanes of one fiber.
struct LiveLanes {
  std::vector<double> t;
  std::vector<std::int32_t> run0, run1;
  std::vector<std::int8_t> label;
  std::vector<std::int64_t> hit;
  std::vector<std::size_t> index;

  void push(double t0, std::size_t i) {
    t.push_back(t0);
    run0.push_back(0);
    run1.push_back(0);
    label.push_back(Label::kUndecided);
    hit.push_back(-1);
    index.push_back(i);
  }
  std::size_t size() const { return t.size(); }
  kernels::LaneState state() { return {t, run0, run1, label, hit}; }

  // Moves decided lanes to `out` and packs the rest to the front.
  void retire(std::vector<Classification>& out) {
    std::size_t keep = 0;
    for (std::size_t i = 0; i < size(); ++i) {
      if (label[i] != Label::kUndecided) {
        out[index[i]] = {static_cast<Label>(label[i]), hit[i]};
        continue;
      }
      t[keep] = t[i];
      run0[keep] = run0[i];
      run1[keep] = run1[i];
      label[keep] = label[i];
      hit[keep] = hit[i];
      index[keep] = index[i];
      ++keep;
    }
    t.resize(keep);
    run0.resize(keep);
    run1.resize(keep);
    label.resize(keep);
    hit.resize(keep);
    index.resize(keep);
  }
};

std::vector<Classification> classify_generic(const skew::KanSystem& sys, double theta0, std::span<const double> ts,
                                             const ClassifyParams& p, std::vector<Classification> out) {
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (out[i].label != Label::kUndecided) continue;
    skew::Point x{theta0, ts[i]};
    std::int32_t r0 = 0, r1 = 0;
    for (std::int64_t s = 1; s <= p.n_max; ++s) {
      x = sys.step(x);
      r0 = x.t < p.delta ? r0 + 1 : 0;
      r1 = x.t > 1.0 - p.delta ? r1 + 1 : 0;
      if (r0 >= p.window) {
        out[i] = {Label::kBasin0, s};
        break;
      }
      if (r1 >= p.window) {
        out[i] = {Label::kBasin1, s};
        break;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<Classification> classify_fiber(const skew::KanSystem& sys, const BaseSeed& theta,
                                           std::span<const double> ts, ClassifyParams params) {
  check_params(params);
  std::vector<Classification> out(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double t = ts[i];
    if (!(t >= 0.0 && t <= 1.0)) throw PreconditionError("classify: t outside [0,1]");
    if (t == 0.0) out[i] = {Label::kBasin0, 0};
    if (t == 1.0) out[i] = {Label::kBasin1, 0};
  }
  if (!sys.fiber().is_product()) return classify_generic(sys, seed_value(theta), ts, params, std::move(out));

  LiveLanes live;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (out[i].label == Label::kUndecided) live.push(ts[i], i);
  }
  CouplingStream stream(sys, theta);
  const kernels::WindowRule rule{params.delta, params.window};
  const auto& poly = sys.fiber().kernel_poly();
  std::vector<double> coeffs(kChunk);
  std::int64_t offset = 0;
  while (live.size() > 0 && offset < params.n_max) {
    auto n = static_cast<std::size_t>(std::min<std::int64_t>(kChunk, params.n_max - offset));
    std::span<double> chunk(coeffs.data(), n);
    stream.fill(chunk);
    kernels::classify_advance(chunk, offset, poly, rule, live.state());
    offset += static_cast<std::int64_t>(n);
    live.retire(out);
  }
  return out;
}

std::vector<Classification> classify_coeffs(const kernels::FiberPoly& poly, std::span<const double> coeffs,
                                            std::span<const double> ts, ClassifyParams params) {
  check_params(params);
  std::vector<Classification> out(ts.size());
  LiveLanes live;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double t = ts[i];
    if (!(t >= 0.0 && t <= 1.0)) throw PreconditionError("classify: t outside [0,1]");
    if (t == 0.0) {
      out[i] = {Label::kBasin0, 0};
    } else if (t == 1.0) {
      out[i] = {Label::kBasin1, 0};
    } else {
      live.push(t, i);
    }
  }
  const kernels::WindowRule rule{params.delta, params.window};
  const auto steps = static_cast<std::int64_t>(std::min<std::size_t>(static_cast<std::size_t>(params.n_max), coeffs.size()));
  std::int64_t offset = 0;
  while (live.size() > 0 && offset < steps) {
    auto n = static_cast<std::size_t>(std::min<std::int64_t>(kChunk, steps - offset));
    kernels::classify_advance(coeffs.subspan(static_cast<std::size_t>(offset), n), offset, poly, rule, live.state());
    offset += static_cast<std::int64_t>(n);
    live.retire(out);
  }
  return out;
}

Classification classify(const skew::KanSystem& sys, const BaseSeed& theta, double t, ClassifyParams params) {
  return classify_fiber(sys, theta, std::span<const double>(&t, 1), params).front();
}

Fractions fractions(std::span<const std::int8_t> labels) {
  std::size_t c[3] = {0, 0, 0};
  for (auto l : labels) ++c[static_cast<std::size_t>(l)];
  const double n = labels.empty() ? 1.0 : static_cast<double>(labels.size());
  return {static_cast<double>(c[0]) / n, static_cast<double>(c[1]) / n, static_cast<double>(c[2]) / n};
}

BasinRaster raster(const skew::KanSystem& sys, std::size_t width, std::size_t height, ClassifyParams params,
                   unsigned workers) {
  if (width == 0 || height == 0) throw PreconditionError("raster: empty resolution");
  check_params(params);
  BasinRaster r;
  r.width = width;
  r.height = height;
  r.params = params;
  r.labels.assign(width * height, Label::kUndecided);
  r.hits.assign(width * height, -1);
  std::vector<double> ts(height);
  for (std::size_t row = 0; row < height; ++row) ts[row] = r.t(row);
  parallel_for(width, workers, [&](std::size_t col) {
    auto res = classify_fiber(sys, r.theta(col), ts, params);
    for (std::size_t row = 0; row < height; ++row) {
      r.labels[row * width + col] = res[row].label;
      r.hits[row * width + col] = res[row].hit;
    }
  });
  r.fractions = fractions(r.labels);
  return r;
}

SymmetryReport mirrored_agreement(const BasinRaster& a, const BasinRaster& b) {
  if (a.width != b.width || a.height != b.height || a.width % 2 != 0) {
    throw PreconditionError("mirrored_agreement: rasters must share an even width and height");
  }
  SymmetryReport s;
  for (std::size_t row = 0; row < a.height; ++row) {
    for (std::size_t col = 0; col < a.width; ++col) {
      Label l = a.at(col, row);
      if (l == Label::kUndecided) continue;
      ++s.decided;
      if (b.at((col + a.width / 2) % a.width, a.height - 1 - row) == flip(l)) ++s.agreeing;
    }
  }
  s.agreement = s.decided == 0 ? 0.0 : static_cast<double>(s.agreeing) / static_cast<double>(s.decided);
  return s;
}

SymmetryReport symmetry_agreement(const BasinRaster& r) { return mirrored_agreement(r, r); }

IntermingledReport intermingled_test(const BasinRaster& r, std::size_t columns, std::size_t rows) {
  if (columns == 0 || rows == 0 || r.width < 16 * columns || r.height < 16 * rows) {
    throw PreconditionError("intermingled_test: raster must be at least 16x finer than the partition");
  }
  IntermingledReport rep;
  rep.columns = columns;
  rep.rows = rows;
  // Coarse row cy spans pixel rows [cy*H/rows, (cy+1)*H/rows); rows 0 and
  // rows-1 touch t=1 and t=0 and are not strictly inside the cylinder.
  for (std::size_t cy = 1; cy + 1 < rows; ++cy) {
    for (std::size_t cx = 0; cx < columns; ++cx) {
      CoarseCell cell{cx, cy};
      for (std::size_t row = cy * r.height / rows; row < (cy + 1) * r.height / rows; ++row) {
        for (std::size_t col = cx * r.width / columns; col < (cx + 1) * r.width / columns; ++col) {
          Label l = r.at(col, row);
          if (l == Label::kBasin0) ++cell.basin0;
          if (l == Label::kBasin1) ++cell.basin1;
        }
      }
      cell.passed = cell.basin0 > 0 && cell.basin1 > 0;
      if (!cell.passed) ++rep.failures;
      rep.cells.push_back(cell);
    }
  }
  rep.passed = rep.failures == 0;
  return rep;
}

std::vector<CoveragePoint> coverage_curve(const skew::KanSystem& sys, std::size_t samples,
                                          std::span<const std::int64_t> n_values, ClassifyParams params,
                                          std::uint64_t seed, unsigned workers) {
  if (samples == 0 || n_values.empty()) throw PreconditionError("coverage_curve: need samples and N values");
  params.n_max = *std::max_element(n_values.begin(), n_values.end());
  std::vector<Classification> res(samples);
  parallel_for(samples, workers, [&](std::size_t i) {
    auto rng = item_rng(seed, i);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double theta = u(rng);
    double t = u(rng);
    res[i] = classify(sys, theta, t, params);
  });
  std::vector<CoveragePoint> curve;
  for (auto n : n_values) {
    std::size_t open = 0;
    for (const auto& c : res) {
      if (c.label == Label::kUndecided || c.hit > n) ++open;
    }
    curve.push_back({n, static_cast<double>(open) / static_cast<double>(samples)});
  }
  return curve;
}

StabilityReport label_stability(const skew::KanSystem& sys, std::size_t samples, ClassifyParams params,
                                std::uint64_t seed, unsigned workers) {
  if (!sys.fiber().is_product()) throw PreconditionError("label_stability needs a product fiber family");
  check_params(params);
  std::vector<int> outcome(samples, 0);  // 0 undecided, 1 stable, 2 flipped
  const kernels::WindowRule rule{params.delta, params.window};
  const auto& poly = sys.fiber().kernel_poly();
  parallel_for(samples, workers, [&](std::size_t i) {
    auto rng = item_rng(seed, i);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double theta = u(rng);
    double t0 = u(rng);
    auto coeffs = CouplingStream(sys, theta).take(static_cast<std::size_t>(2 * params.n_max));
    double t = t0;
    std::int32_t r0 = 0, r1 = 0;
    std::int8_t label = Label::kUndecided;
    std::int64_t hit = -1;
    kernels::LaneState lane{{&t, 1}, {&r0, 1}, {&r1, 1}, {&label, 1}, {&hit, 1}};
    kernels::classify_advance(std::span(coeffs).first(static_cast<std::size_t>(params.n_max)), 0, poly, rule, lane);
    if (label == Label::kUndecided) return;
    const auto first = static_cast<Label>(label);
    outcome[i] = 1;
    // Keep going with fresh counters; a same-label window restarts the watch.
    while (hit < 2 * params.n_max) {
      std::int64_t from = hit;
      label = Label::kUndecided;
      r0 = r1 = 0;
      kernels::classify_advance(std::span(coeffs).subspan(static_cast<std::size_t>(from)), from, poly, rule, lane);
      if (label == Label::kUndecided) break;
      if (label != first) {
        outcome[i] = 2;
        break;
      }
    }
  });
  StabilityReport rep;
  for (int o : outcome) {
    if (o > 0) ++rep.decided;
    if (o == 2) ++rep.flipped;
  }
  return rep;
}

}  // namespace kanlab::basins
