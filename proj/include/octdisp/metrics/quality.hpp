#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "octdisp/core/error.hpp"
#include "octdisp/core/matrix.hpp"

namespace octdisp::metrics {

inline double mse(const RealMatrix& f, const RealMatrix& g) {
  require(f.same_shape(g), "mse: image dimensions differ");
  require(!f.empty(), "mse: empty images");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f.data()[i] - g.data()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(f.size());
}

/// PSNR in dB with peak s = max(g), g being the reconstructed image.
/// Identical images give +infinity.
inline double psnr(const RealMatrix& ground_truth, const RealMatrix& reconstructed) {
  const double e = mse(ground_truth, reconstructed);
  const auto& g = reconstructed.data();
  const double s = *std::max_element(g.begin(), g.end());
  require(s > 0.0, "psnr: reconstructed image has no positive pixel", ErrorKind::domain);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(s * s / e);
}

/// PSNR with a fixed peak value instead of max(g).
inline double psnr_fixed_range(const RealMatrix& ground_truth, const RealMatrix& reconstructed, double peak) {
  require(peak > 0.0, "psnr: peak must be positive");
  const double e = mse(ground_truth, reconstructed);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / e);
}

// ---------------------------------------------------------------------------
// SSIM / MS-SSIM
// ---------------------------------------------------------------------------

inline constexpr std::array<double, 5> kStandardScaleWeights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

struct MsSsimConfig {
  double k1 = 0.01;
  double k2 = 0.03;
  /// Dynamic range; <= 0 selects max(max x, max y).
  double dynamic_range = 0.0;
  std::size_t scales = 5;
  /// Exponent per scale, applied as β_j = γ_j and α_M = β_M. Empty selects
  /// the standard five-scale weights (or uniform 1/M for other M).
  std::vector<double> weights;
  std::size_t window_size = 11;
  double window_sigma = 1.5;

  static MsSsimConfig uniform_weights(std::size_t m = 5) {
    MsSsimConfig cfg;
    cfg.scales = m;
    cfg.weights.assign(m, 1.0 / static_cast<double>(m));
    return cfg;
  }
};

inline std::vector<double> scale_weights(const MsSsimConfig& cfg) {
  if (!cfg.weights.empty()) {
    require(cfg.weights.size() == cfg.scales, "ms_ssim: one weight per scale required");
    return cfg.weights;
  }
  if (cfg.scales == kStandardScaleWeights.size()) return {kStandardScaleWeights.begin(), kStandardScaleWeights.end()};
  return std::vector<double>(cfg.scales, 1.0 / static_cast<double>(cfg.scales));
}

/// Local statistics of a patch pair.
struct PatchStats {
  double mean_x = 0, mean_y = 0;
  double var_x = 0, var_y = 0;
  double cov_xy = 0;
};

struct SsimComponents {
  double luminance = 1.0;
  double contrast = 1.0;
  double structure = 1.0;
};

struct SsimConstants {
  double c1, c2, c3;
};

inline SsimConstants ssim_constants(const MsSsimConfig& cfg, double dynamic_range) {
  require(cfg.k1 > 0 && cfg.k2 > 0, "ssim: K1 and K2 must be positive");
  require(dynamic_range > 0, "ssim: dynamic range must be positive", ErrorKind::domain);
  const double c1 = (cfg.k1 * dynamic_range) * (cfg.k1 * dynamic_range);
  const double c2 = (cfg.k2 * dynamic_range) * (cfg.k2 * dynamic_range);
  return {c1, c2, c2 / 2.0};
}

/// Luminance, contrast and structure terms. The structure term uses the
/// covariance: s = (σxy + C3)/(σx·σy + C3).
inline SsimComponents ssim_components(const PatchStats& p, const SsimConstants& k) {
  const double vx = std::max(p.var_x, 0.0);
  const double vy = std::max(p.var_y, 0.0);
  // sqrt(vx·vy) rather than sqrt(vx)·sqrt(vy): exact when vx == vy
  const double sxy = std::sqrt(vx * vy);
  const double cov = std::clamp(p.cov_xy, -sxy, sxy);
  SsimComponents out;
  out.luminance = (2.0 * p.mean_x * p.mean_y + k.c1) / (p.mean_x * p.mean_x + p.mean_y * p.mean_y + k.c1);
  out.contrast = (2.0 * sxy + k.c2) / (vx + vy + k.c2);
  out.structure = (cov + k.c3) / (sxy + k.c3);
  return out;
}

inline std::vector<double> gaussian_kernel_1d(std::size_t size, double sigma) {
  require(size >= 1 && size % 2 == 1, "ssim: window size must be odd");
  require(sigma > 0, "ssim: window sigma must be positive");
  std::vector<double> w(size);
  const double c = static_cast<double>(size / 2);
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - c;
    w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

namespace detail {

/// Separable 'valid' filtering with a normalized 1-D kernel.
inline RealMatrix filter_valid(const RealMatrix& img, const std::vector<double>& w) {
  const std::size_t n = w.size();
  const std::size_t rows = img.rows() - n + 1;
  const std::size_t cols = img.cols() - n + 1;
  RealMatrix tmp(img.rows(), cols);
  for (std::size_t r = 0; r < img.rows(); ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += w[i] * img(r, c + i);
      tmp(r, c) = acc;
    }
  RealMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += w[i] * tmp(r + i, c);
      out(r, c) = acc;
    }
  return out;
}

inline RealMatrix product(const RealMatrix& a, const RealMatrix& b) {
  RealMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  return out;
}

}  // namespace detail

/// 2×2 mean then decimation; odd trailing rows/columns are dropped.
inline RealMatrix downsample2(const RealMatrix& img) {
  const std::size_t rows = img.rows() / 2, cols = img.cols() / 2;
  RealMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      out(r, c) = 0.25 * (img(2 * r, 2 * c) + img(2 * r, 2 * c + 1) + img(2 * r + 1, 2 * c) + img(2 * r + 1, 2 * c + 1));
  return out;
}

/// Mean SSIM terms of one scale.
struct ScaleResult {
  double luminance = 1.0;       // mean of l map
  double contrast = 1.0;        // mean of c map
  double structure = 1.0;       // mean of s map
  double contrast_structure = 1.0;  // mean of c·s map
  double ssim = 1.0;            // mean of l·c·s map
};

inline ScaleResult ssim_scale(const RealMatrix& x, const RealMatrix& y, const SsimConstants& k,
                              const std::vector<double>& window) {
  const auto mx = detail::filter_valid(x, window);
  const auto my = detail::filter_valid(y, window);
  const auto sxx = detail::filter_valid(detail::product(x, x), window);
  const auto syy = detail::filter_valid(detail::product(y, y), window);
  const auto sxy = detail::filter_valid(detail::product(x, y), window);
  ScaleResult res{0, 0, 0, 0, 0};
  const std::size_t n = mx.size();
  for (std::size_t i = 0; i < n; ++i) {
    PatchStats p;
    p.mean_x = mx.data()[i];
    p.mean_y = my.data()[i];
    p.var_x = sxx.data()[i] - p.mean_x * p.mean_x;
    p.var_y = syy.data()[i] - p.mean_y * p.mean_y;
    p.cov_xy = sxy.data()[i] - p.mean_x * p.mean_y;
    const auto c = ssim_components(p, k);
    res.luminance += c.luminance;
    res.contrast += c.contrast;
    res.structure += c.structure;
    res.contrast_structure += c.contrast * c.structure;
    res.ssim += c.luminance * c.contrast * c.structure;
  }
  const double inv = 1.0 / static_cast<double>(n);
  res.luminance *= inv;
  res.contrast *= inv;
  res.structure *= inv;
  res.contrast_structure *= inv;
  res.ssim *= inv;
  return res;
}

struct MsSsimResult {
  double value = 1.0;
  std::vector<ScaleResult> scales;
};

inline std::size_t min_dimension_for(const MsSsimConfig& cfg) {
  return (std::size_t{1} << (cfg.scales - 1)) * cfg.window_size;
}

/// Multi-scale SSIM: Π_{j<M} mean(c·s)_j^{w_j} · mean(l·c·s)_M^{w_M}.
/// Per-scale terms below 1e-12 are clamped to 1e-12.
inline MsSsimResult ms_ssim_detailed(const RealMatrix& x, const RealMatrix& y, const MsSsimConfig& cfg = {}) {
  require(x.same_shape(y), "ms_ssim: image dimensions differ");
  require(cfg.scales >= 1, "ms_ssim: need at least one scale");
  const std::size_t min_dim = min_dimension_for(cfg);
  if (std::min(x.rows(), x.cols()) < min_dim) {
    std::size_t m = cfg.scales;
    while (m > 1 && std::min(x.rows(), x.cols()) < (std::size_t{1} << (m - 1)) * cfg.window_size) --m;
    fail(ErrorKind::invalid_argument, "ms_ssim: image " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                                          " too small for " + std::to_string(cfg.scales) + " scales (needs " +
                                          std::to_string(min_dim) + " px); try scales=" + std::to_string(m));
  }
  const auto weights = scale_weights(cfg);
  double range = cfg.dynamic_range;
  if (range <= 0.0) {
    const double mx = *std::max_element(x.data().begin(), x.data().end());
    const double my = *std::max_element(y.data().begin(), y.data().end());
    range = std::max(mx, my);
  }
  const auto k = ssim_constants(cfg, range);
  const auto window = gaussian_kernel_1d(cfg.window_size, cfg.window_sigma);

  MsSsimResult out;
  RealMatrix cx = x, cy = y;
  double value = 1.0;
  constexpr double kFloor = 1e-12;
  for (std::size_t j = 0; j < cfg.scales; ++j) {
    const auto s = ssim_scale(cx, cy, k, window);
    out.scales.push_back(s);
    const bool last = (j + 1 == cfg.scales);
    const double term = std::max(last ? s.ssim : s.contrast_structure, kFloor);
    value *= std::pow(term, weights[j]);
    if (!last) {
      cx = downsample2(cx);
      cy = downsample2(cy);
    }
  }
  out.value = value;
  return out;
}

inline double ms_ssim(const RealMatrix& x, const RealMatrix& y, const MsSsimConfig& cfg = {}) {
  return ms_ssim_detailed(x, y, cfg).value;
}

}  // namespace octdisp::metrics
