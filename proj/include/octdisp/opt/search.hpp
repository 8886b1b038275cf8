#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "octdisp/core/error.hpp"
#include "octdisp/core/parallel.hpp"
#include "octdisp/core/reconstruct.hpp"
#include "octdisp/opt/sharpness.hpp"

namespace octdisp::opt {

struct SearchConfig {
  double a2_lo = -100.0;
  double a2_hi = 100.0;
  std::size_t grid_points = 41;
  std::size_t golden_iterations = 30;
  double tolerance = 1e-3;
};

inline void validate(const SearchConfig& cfg) {
  require(std::isfinite(cfg.a2_lo) && std::isfinite(cfg.a2_hi), "search: range must be finite");
  require(cfg.a2_lo < cfg.a2_hi, "search: degenerate a2 range (lo must be < hi)");
  require(std::abs(cfg.a2_lo) <= kDefaultCoefficientBound && std::abs(cfg.a2_hi) <= kDefaultCoefficientBound,
          "search: range exceeds the coefficient bound");
  require(cfg.grid_points >= 3, "search: need at least 3 grid points");
  require(cfg.tolerance > 0, "search: tolerance must be positive");
}

/// One depth band [row_begin, row_end) and its coefficients.
struct DepthBand {
  std::size_t row_begin = 0;
  std::size_t row_end = 0;
  DispersionCoefficients coeffs;

  std::size_t height() const noexcept { return row_end - row_begin; }
  friend bool operator==(const DepthBand&, const DepthBand&) = default;
};

/// Per-depth coefficients C1…CN, ordered shallow to deep.
struct DispersionProfile {
  std::vector<DepthBand> bands;

  std::size_t depth() const noexcept { return bands.empty() ? 0 : bands.back().row_end; }
  friend bool operator==(const DispersionProfile&, const DispersionProfile&) = default;
};

inline void validate(const DispersionProfile& p, std::size_t n_z) {
  require(!p.bands.empty(), "profile: no bands");
  require(p.bands.front().row_begin == 0, "profile: first band must start at row 0");
  require(p.bands.back().row_end == n_z, "profile: bands must cover every depth row");
  for (std::size_t b = 0; b < p.bands.size(); ++b) {
    require(p.bands[b].row_end > p.bands[b].row_begin, "profile: empty band");
    if (b > 0) require(p.bands[b].row_begin == p.bands[b - 1].row_end, "profile: bands must be contiguous");
    require(p.bands[b].coeffs.finite(), "profile: non-finite coefficients");
  }
}

/// Equal-height band edges over n_z rows.
inline std::vector<std::size_t> equal_band_edges(std::size_t n_z, std::size_t n_bands) {
  require(n_bands >= 1, "bands: need at least one band");
  require(n_bands <= n_z, "bands: more bands than depth rows");
  std::vector<std::size_t> edges(n_bands + 1);
  for (std::size_t b = 0; b <= n_bands; ++b) edges[b] = (b * n_z) / n_bands;
  return edges;
}

/// Result of a 1-D coefficient search.
struct SearchTrace {
  std::vector<double> grid_a2;
  std::vector<double> grid_score;
  double best_a2 = 0.0;
  double best_score = -std::numeric_limits<double>::infinity();
};

/// Coarse grid over [lo, hi] then golden-section refinement inside the
/// neighbouring grid cells of the best candidate. a3 stays 0.
inline SearchTrace search_a2(const AnalyticFrame& frame, const WavenumberGrid& grid, const SharpnessConfig& scfg,
                             const SearchConfig& cfg) {
  validate(cfg);
  validate(scfg);
  auto score = [&](double a2) { return sharpness(reconstruct_bscan(frame, {a2, 0.0}, grid), scfg); };

  SearchTrace trace;
  const std::size_t n = cfg.grid_points;
  const double step = (cfg.a2_hi - cfg.a2_lo) / static_cast<double>(n - 1);
  trace.grid_a2.resize(n);
  trace.grid_score.resize(n);
  for (std::size_t i = 0; i < n; ++i) trace.grid_a2[i] = cfg.a2_lo + step * static_cast<double>(i);
  trace.grid_a2.back() = cfg.a2_hi;
  parallel_for(n, [&](std::size_t i) { trace.grid_score[i] = score(trace.grid_a2[i]); });

  // ties go to the smallest |a2|, then the smaller a2
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const double s = trace.grid_score[i], sb = trace.grid_score[best];
    if (s > sb || (s == sb && std::abs(trace.grid_a2[i]) < std::abs(trace.grid_a2[best]))) best = i;
  }
  trace.best_a2 = trace.grid_a2[best];
  trace.best_score = trace.grid_score[best];

  double lo = trace.grid_a2[best == 0 ? 0 : best - 1];
  double hi = trace.grid_a2[std::min(best + 1, n - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = score(x1), f2 = score(x2);
  for (std::size_t it = 0; it < cfg.golden_iterations && (hi - lo) > cfg.tolerance; ++it) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = score(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = score(x2);
    }
  }
  const double refined = f1 >= f2 ? x1 : x2;
  const double refined_score = std::max(f1, f2);
  if (refined_score > trace.best_score) {
    trace.best_a2 = refined;
    trace.best_score = refined_score;
  }
  return trace;
}

/// Global second-order coefficient for a prepared (background-subtracted,
/// k-linearized) frame.
inline DispersionCoefficients search_global_a2(const Spectrogram& prepared, const WavenumberGrid& grid,
                                               const ReconstructionConfig& cfg, const SharpnessConfig& scfg = {},
                                               const SearchConfig& search = {}) {
  validate(search);
  const auto frame = make_analytic_frame(prepared, grid, cfg);
  return {search_a2(frame, grid, scfg, search).best_a2, 0.0};
}

/// Splits depth into n_bands equal windows and searches a2 per window, with
/// sharpness scored only inside that window.
inline DispersionProfile search_depth_bands(const Spectrogram& prepared, std::size_t n_bands,
                                            const WavenumberGrid& grid, const ReconstructionConfig& cfg,
                                            const SharpnessConfig& scfg = {}, const SearchConfig& search = {}) {
  validate(search);
  const auto edges = equal_band_edges(grid.n_z(), n_bands);
  const auto frame = make_analytic_frame(prepared, grid, cfg);
  DispersionProfile profile;
  for (std::size_t b = 0; b < n_bands; ++b) {
    SharpnessConfig band_cfg = scfg;
    band_cfg.region.row_begin = edges[b];
    band_cfg.region.row_end = edges[b + 1];
    const auto trace = search_a2(frame, grid, band_cfg, search);
    profile.bands.push_back(DepthBand{edges[b], edges[b + 1], {trace.best_a2, 0.0}});
  }
  return profile;
}

}  // namespace octdisp::opt
