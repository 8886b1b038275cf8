#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "octdisp/core/error.hpp"
#include "octdisp/core/fft.hpp"
#include "octdisp/core/interp.hpp"
#include "octdisp/core/parallel.hpp"
#include "octdisp/core/types.hpp"

namespace octdisp {

using Complex = std::complex<double>;

/// Analytic k-domain spectrum of one A-line.
struct ComplexSpectrum {
  std::vector<Complex> values;
};

// ---------------------------------------------------------------------------
// Background subtraction and k-linearization
// ---------------------------------------------------------------------------

inline Spectrogram subtract_background(const Spectrogram& frame, const ReconstructionConfig& cfg) {
  require(!frame.data.empty(), "subtract_background: empty frame");
  Spectrogram out = frame;
  const std::size_t n_k = frame.n_k();
  const std::size_t n_a = frame.n_a();
  if (cfg.background == BackgroundMode::reference) {
    require(cfg.reference_spectrum.size() == n_k,
            "subtract_background: reference spectrum length " + std::to_string(cfg.reference_spectrum.size()) +
                " does not match n_k " + std::to_string(n_k));
    for (std::size_t r = 0; r < n_k; ++r) {
      auto row = out.data.row(r);
      for (auto& v : row) v -= cfg.reference_spectrum[r];
    }
    return out;
  }
  for (std::size_t r = 0; r < n_k; ++r) {
    auto row = out.data.row(r);
    double sum = 0.0;
    for (double v : row) sum += v;
    const double mean = sum / static_cast<double>(n_a);
    for (auto& v : row) v -= mean;
  }
  return out;
}

/// Plan mapping wavelength-ordered detector rows onto the uniform k axis.
inline ResamplingPlan make_linearization_plan(const WavenumberGrid& grid, Interpolation interp) {
  require(grid.lambda_strictly_increasing(), "linearize_k: lambda_samples must be strictly increasing",
          ErrorKind::invalid_argument);
  const auto& lambda = grid.lambda_samples();
  const std::size_t n = lambda.size();
  // ascending k knots correspond to descending wavelength rows
  std::vector<double> knots(n);
  for (std::size_t i = 0; i < n; ++i) knots[i] = 2.0 * std::numbers::pi / lambda[n - 1 - i];
  ResamplingPlan plan = make_resampling_plan(knots, grid.k_uniform(), interp == Interpolation::cubic ? 3 : 1);
  for (auto& idx : plan.index)
    for (auto& i : idx) i = n - 1 - i;  // back to detector row order
  return plan;
}

inline Spectrogram linearize_k(const Spectrogram& frame, const WavenumberGrid& grid, const ReconstructionConfig& cfg) {
  require(frame.domain == SpectralDomain::wavelength, "linearize_k: frame is already k-linearized");
  require(frame.n_k() == grid.n_k(), "linearize_k: frame rows do not match grid n_k");
  const ResamplingPlan plan = make_linearization_plan(grid, cfg.interpolation);
  Spectrogram out{RealMatrix(grid.n_k(), frame.n_a()), SpectralDomain::k_linear};
  parallel_for(frame.n_a(), [&](std::size_t c) {
    const auto src = frame.data.column(c);
    std::vector<double> dst(grid.n_k());
    plan.apply(src, dst);
    out.data.set_column(c, dst);
  });
  return out;
}

/// Background subtraction followed by k-linearization.
inline Spectrogram prepare_raw(const Spectrogram& raw, const WavenumberGrid& grid, const ReconstructionConfig& cfg) {
  return linearize_k(subtract_background(raw, cfg), grid, cfg);
}

// ---------------------------------------------------------------------------
// Windowing, analytic promotion, phase correction
// ---------------------------------------------------------------------------

inline std::vector<double> window_weights(const WavenumberGrid& grid, const Window& window) {
  const std::size_t n = grid.n_k();
  std::vector<double> w(n, 1.0);
  if (std::holds_alternative<HannWindow>(window)) {
    for (std::size_t j = 0; j < n; ++j)
      w[j] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n - 1));
  } else if (const auto* g = std::get_if<GaussianWindow>(&window)) {
    for (std::size_t j = 0; j < n; ++j) {
      const double u = grid.u(j);
      w[j] = std::exp(-0.5 * u * u / (g->sigma * g->sigma));
    }
  }
  return w;
}

/// One-sided analytic signal: transform to depth, zero negative frequencies,
/// double the strictly positive ones, keep DC and Nyquist, transform back.
inline std::vector<Complex> analytic_signal(std::span<const double> real) {
  const std::size_t n = real.size();
  require(n >= 2, "analytic_signal: need at least 2 samples");
  std::vector<Complex> buf(real.begin(), real.end());
  std::vector<Complex> spec(n);
  fft::transform(buf, spec, fft::Direction::forward);
  const std::size_t half = n / 2;
  for (std::size_t m = 1; m < n; ++m) {
    if (m < half || (n % 2 == 1 && m == half)) spec[m] *= 2.0;
    else if (m > half) spec[m] = 0.0;
  }
  return fft::inverse(spec);
}

/// exp(i·(−a2·u² − a3·u³)) on the grid's uniform k samples.
inline std::vector<Complex> correction_phasors(const DispersionCoefficients& coeffs, const WavenumberGrid& grid) {
  require(coeffs.finite(), "phase correction: non-finite coefficients");
  std::vector<Complex> out(grid.n_k());
  for (std::size_t j = 0; j < grid.n_k(); ++j) {
    const double u = grid.u(j);
    out[j] = std::polar(1.0, -coeffs.a2 * u * u - coeffs.a3 * u * u * u);
  }
  return out;
}

inline ComplexSpectrum apply_phase_correction(const ComplexSpectrum& spectrum, const DispersionCoefficients& coeffs,
                                              const WavenumberGrid& grid) {
  require(coeffs.finite(), "phase correction: non-finite coefficients");
  require(spectrum.values.size() == grid.n_k(), "phase correction: spectrum length does not match grid");
  if (coeffs.is_zero()) return spectrum;
  const auto phasors = correction_phasors(coeffs, grid);
  ComplexSpectrum out{spectrum.values};
  for (std::size_t j = 0; j < out.values.size(); ++j) out.values[j] *= phasors[j];
  return out;
}

/// Real k-linearized A-line: promoted to its analytic signal, then corrected.
inline ComplexSpectrum apply_phase_correction(std::span<const double> aline, const DispersionCoefficients& coeffs,
                                              const WavenumberGrid& grid) {
  require(coeffs.finite(), "phase correction: non-finite coefficients");
  require(aline.size() == grid.n_k(), "phase correction: A-line length does not match grid");
  return apply_phase_correction(ComplexSpectrum{analytic_signal(aline)}, coeffs, grid);
}

namespace detail {

inline std::vector<Complex> windowed_analytic(std::span<const double> aline, std::span<const double> window) {
  std::vector<double> tmp(aline.begin(), aline.end());
  for (std::size_t j = 0; j < tmp.size(); ++j) tmp[j] *= window[j];
  return analytic_signal(tmp);
}

/// Positive-depth magnitude of a (possibly corrected) analytic spectrum,
/// normalized by n_k.
inline void depth_magnitude(std::span<const Complex> analytic, std::span<const Complex> phasors,
                            std::span<double> out) {
  const std::size_t n = analytic.size();
  std::vector<Complex> buf(analytic.begin(), analytic.end());
  if (!phasors.empty())
    for (std::size_t j = 0; j < n; ++j) buf[j] *= phasors[j];
  std::vector<Complex> depth(n);
  fft::transform(buf, depth, fft::Direction::forward);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t z = 0; z < out.size(); ++z) out[z] = std::abs(depth[z]) * scale;
}

inline std::vector<Complex> phasors_or_empty(const DispersionCoefficients& coeffs, const WavenumberGrid& grid) {
  require(coeffs.finite(), "reconstruction: non-finite coefficients");
  if (coeffs.is_zero()) return {};
  return correction_phasors(coeffs, grid);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// A-scan / B-scan reconstruction
// ---------------------------------------------------------------------------

inline std::vector<double> reconstruct_ascan(std::span<const double> aline, const DispersionCoefficients& coeffs,
                                             const WavenumberGrid& grid, const ReconstructionConfig& cfg) {
  require(aline.size() == grid.n_k(), "reconstruct_ascan: A-line length does not match grid");
  validate(cfg);
  const auto window = window_weights(grid, cfg.window);
  const auto analytic = detail::windowed_analytic(aline, window);
  const auto phasors = detail::phasors_or_empty(coeffs, grid);
  std::vector<double> out(grid.n_z());
  detail::depth_magnitude(analytic, phasors, out);
  return out;
}

/// Windowed analytic spectra of every A-line of a prepared frame. These do not
/// depend on the correction coefficients, so searches compute them once.
struct AnalyticFrame {
  std::size_t n_k = 0;
  std::vector<std::vector<Complex>> columns;
  double axial_pixel_um = 1.5;

  std::size_t n_a() const noexcept { return columns.size(); }
};

inline AnalyticFrame make_analytic_frame(const Spectrogram& prepared, const WavenumberGrid& grid,
                                         const ReconstructionConfig& cfg) {
  require(prepared.domain == SpectralDomain::k_linear, "reconstruction requires a k-linearized frame");
  require(prepared.n_k() == grid.n_k(), "reconstruction: frame rows do not match grid n_k");
  validate(cfg);
  const auto window = window_weights(grid, cfg.window);
  AnalyticFrame out{grid.n_k(), std::vector<std::vector<Complex>>(prepared.n_a()), grid.axial_pixel_um()};
  parallel_for(prepared.n_a(), [&](std::size_t c) {
    const auto col = prepared.data.column(c);
    out.columns[c] = detail::windowed_analytic(col, window);
  });
  return out;
}

inline BScan reconstruct_bscan(const AnalyticFrame& frame, const DispersionCoefficients& coeffs,
                               const WavenumberGrid& grid) {
  require(frame.n_k == grid.n_k(), "reconstruction: frame does not match grid");
  const auto phasors = detail::phasors_or_empty(coeffs, grid);
  BScan out{RealMatrix(grid.n_z(), frame.n_a()), ImageScale::linear, grid.axial_pixel_um()};
  parallel_for(frame.n_a(), [&](std::size_t c) {
    std::vector<double> col(grid.n_z());
    detail::depth_magnitude(frame.columns[c], phasors, col);
    out.pixels.set_column(c, col);
  });
  return out;
}

/// Column-wise reconstruct_ascan of a k-linearized, background-subtracted frame.
inline BScan reconstruct_bscan(const Spectrogram& prepared, const DispersionCoefficients& coeffs,
                               const WavenumberGrid& grid, const ReconstructionConfig& cfg) {
  return reconstruct_bscan(make_analytic_frame(prepared, grid, cfg), coeffs, grid);
}

// ---------------------------------------------------------------------------
// Display and averaging
// ---------------------------------------------------------------------------

inline BScan average_frames(std::span<const BScan> frames) {
  require(!frames.empty(), "average_frames: empty frame list");
  const auto& first = frames.front();
  for (const auto& f : frames) {
    require(f.scale == ImageScale::linear, "average_frames: all frames must be linear scale");
    require(f.pixels.same_shape(first.pixels), "average_frames: frame dimensions differ");
  }
  if (frames.size() == 1) return first;
  BScan out{RealMatrix(first.n_z(), first.n_a()), ImageScale::linear, first.axial_pixel_um};
  auto& acc = out.pixels.data();
  for (const auto& f : frames)
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += f.pixels.data()[i];
  const double inv = 1.0 / static_cast<double>(frames.size());
  for (auto& v : acc) v *= inv;
  return out;
}

inline BScan log_display(const BScan& image, double floor_db = -50.0) {
  require(image.scale == ImageScale::linear, "log_display: image must be linear scale");
  require(floor_db < 0.0, "log_display: floor must be negative");
  const auto& px = image.pixels.data();
  require(!px.empty(), "log_display: empty image");
  const double peak = *std::max_element(px.begin(), px.end());
  require(peak > 0.0, "log_display: all-zero image", ErrorKind::domain);
  BScan out{RealMatrix(image.n_z(), image.n_a()), ImageScale::log_db, image.axial_pixel_um};
  auto& dst = out.pixels.data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double db = px[i] > 0.0 ? 20.0 * std::log10(px[i] / peak) : -std::numeric_limits<double>::infinity();
    dst[i] = std::clamp(db, floor_db, 0.0);
  }
  return out;
}

}  // namespace octdisp
