#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// are written from the definitions, not by calling the library routine under
// test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "octdisp/octdisp.hpp"

namespace octdisp::testkit {

/// Reference-background reconstruction config for a source and grid.
inline ReconstructionConfig reference_config(const sim::SourceSpec& source, const WavenumberGrid& grid) {
  ReconstructionConfig cfg;
  cfg.background = BackgroundMode::reference;
  cfg.reference_spectrum = sim::reference_spectrum(source, grid);
  return cfg;
}

/// Same phantom with every layer's dispersion removed.
inline sim::Phantom without_dispersion(sim::Phantom p) {
  for (auto& l : p.layers) l.a2_sample = l.a3_sample = 0.0;
  return p;
}

/// Simulate, prepare and reconstruct with one coefficient pair.
inline BScan simulate_and_reconstruct(const sim::Phantom& phantom, const sim::SourceSpec& source,
                                      const WavenumberGrid& grid, const DispersionCoefficients& coeffs,
                                      const sim::NoiseSpec& noise = {}) {
  const auto cfg = reference_config(source, grid);
  const auto raw = sim::synthesize_spectrogram(phantom, source, noise, grid);
  return reconstruct_bscan(prepare_raw(raw, grid, cfg), coeffs, grid, cfg);
}

/// Mean over columns of a linear B-scan.
inline std::vector<double> column_mean(const BScan& b) {
  std::vector<double> p(b.n_z(), 0.0);
  for (std::size_t z = 0; z < b.n_z(); ++z) {
    for (std::size_t c = 0; c < b.n_a(); ++c) p[z] += b.pixels(z, c);
    p[z] /= static_cast<double>(b.n_a());
  }
  return p;
}

struct LayerPeak {
  double location = 0.0;  // px, parabolic refinement
  double fwhm = 0.0;      // px
  double height = 0.0;
};

/// Direct half-maximum width: walk both sides of the sample `peak` until the
/// profile drops to half height, interpolating linearly.
inline double half_max_width(const std::vector<double>& p, std::size_t peak) {
  const double half = p[peak] / 2.0;
  std::size_t l = peak;
  while (l > 0 && p[l] > half) --l;
  std::size_t r = peak;
  while (r + 1 < p.size() && p[r] > half) ++r;
  const double left = static_cast<double>(l) + (half - p[l]) / (p[l + 1] - p[l]);
  const double right = static_cast<double>(r) - (half - p[r]) / (p[r - 1] - p[r]);
  return right - left;
}

/// Highest sample within ±window px of `expected`, with its width.
inline LayerPeak measure_layer(const std::vector<double>& p, double expected, double window = 6.0) {
  const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(expected - window)));
  const auto hi = std::min(p.size() - 1, static_cast<std::size_t>(std::ceil(expected + window)));
  std::size_t best = lo;
  for (std::size_t i = lo; i <= hi; ++i)
    if (p[i] > p[best]) best = i;
  LayerPeak out;
  out.height = p[best];
  out.fwhm = half_max_width(p, best);
  out.location = static_cast<double>(best);
  if (best > 0 && best + 1 < p.size()) {
    const double a = p[best - 1], b = p[best], c = p[best + 1];
    const double d = a - 2.0 * b + c;
    if (d < 0.0) out.location += 0.5 * (a - c) / d;
  }
  return out;
}

inline double layer_pixel(const sim::PhantomLayer& l, const WavenumberGrid& grid) {
  return l.depth_um / grid.axial_pixel_um();
}

inline RealMatrix random_image(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = 0.0,
                               double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  RealMatrix m(rows, cols);
  for (auto& v : m.data()) v = d(rng);
  return m;
}

// ---------------------------------------------------------------------------
// Brute-force image-quality oracles
// ---------------------------------------------------------------------------

inline double oracle_psnr(const RealMatrix& f, const RealMatrix& g) {
  long double sum = 0.0L;
  double peak = g(0, 0);
  for (std::size_t r = 0; r < f.rows(); ++r)
    for (std::size_t c = 0; c < f.cols(); ++c) {
      const long double d = static_cast<long double>(f(r, c)) - g(r, c);
      sum += d * d;
      peak = std::max(peak, g(r, c));
    }
  const long double mse = sum / static_cast<long double>(f.rows() * f.cols());
  return static_cast<double>(10.0L * std::log10(static_cast<long double>(peak) * peak / mse));
}

/// Brute-force MS-SSIM: full 2-D Gaussian window per output pixel, statistics
/// as centred moments, 2×2 block-mean pyramid. Standard five-scale weights.
inline double oracle_ms_ssim(RealMatrix x, RealMatrix y) {
  const double weights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  double L = 0.0;
  for (double v : x.data()) L = std::max(L, v);
  for (double v : y.data()) L = std::max(L, v);
  const double C1 = (0.01 * L) * (0.01 * L), C2 = (0.03 * L) * (0.03 * L), C3 = C2 / 2.0;

  double w2[11][11];
  double total = 0.0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) {
      w2[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2.0 * 1.5 * 1.5));
      total += w2[i][j];
    }
  for (auto& row : w2)
    for (double& v : row) v /= total;

  double result = 1.0;
  for (int scale = 0; scale < 5; ++scale) {
    const std::size_t rows = x.rows() - 10, cols = x.cols() - 10;
    long double sum_cs = 0.0L, sum_lcs = 0.0L;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        double mx = 0, my = 0;
        for (int i = 0; i < 11; ++i)
          for (int j = 0; j < 11; ++j) {
            mx += w2[i][j] * x(r + i, c + j);
            my += w2[i][j] * y(r + i, c + j);
          }
        double vx = 0, vy = 0, cov = 0;
        for (int i = 0; i < 11; ++i)
          for (int j = 0; j < 11; ++j) {
            const double dx = x(r + i, c + j) - mx, dy = y(r + i, c + j) - my;
            vx += w2[i][j] * dx * dx;
            vy += w2[i][j] * dy * dy;
            cov += w2[i][j] * dx * dy;
          }
        const double sx = std::sqrt(vx), sy = std::sqrt(vy);
        const double l = (2 * mx * my + C1) / (mx * mx + my * my + C1);
        const double cterm = (2 * sx * sy + C2) / (vx + vy + C2);
        const double s = (cov + C3) / (sx * sy + C3);
        sum_cs += cterm * s;
        sum_lcs += l * cterm * s;
      }
    const double n = static_cast<double>(rows * cols);
    const double term = std::max(static_cast<double>((scale == 4 ? sum_lcs : sum_cs) / n), 1e-12);
    result *= std::pow(term, weights[scale]);
    if (scale < 4) {
      RealMatrix nx(x.rows() / 2, x.cols() / 2), ny(y.rows() / 2, y.cols() / 2);
      for (std::size_t r = 0; r < nx.rows(); ++r)
        for (std::size_t c = 0; c < nx.cols(); ++c) {
          nx(r, c) = (x(2 * r, 2 * c) + x(2 * r + 1, 2 * c) + x(2 * r, 2 * c + 1) + x(2 * r + 1, 2 * c + 1)) / 4.0;
          ny(r, c) = (y(2 * r, 2 * c) + y(2 * r + 1, 2 * c) + y(2 * r, 2 * c + 1) + y(2 * r + 1, 2 * c + 1)) / 4.0;
        }
      x = std::move(nx);
      y = std::move(ny);
    }
  }
  return result;
}

inline double relative_error(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("octdisp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace octdisp::testkit
