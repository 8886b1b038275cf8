#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "octdisp/core/error.hpp"
#include "octdisp/core/matrix.hpp"

namespace octdisp {

/// Spectrometer sampling and the uniform wavenumber axis it is resampled onto.
///
/// Detector pixels are uniformly spaced in wavelength (ascending). The uniform
/// wavenumber axis spans the same k range, ascending, with spacing chosen so
/// that one FFT bin equals axial_pixel_um of depth for a round-trip fringe
/// cos(2·k·z).
class WavenumberGrid {
 public:
  WavenumberGrid() = default;

  /// Grid for a spectrometer centred at center_wavelength_um whose k span
  /// yields the requested axial pixel size.
  static WavenumberGrid make(std::size_t n_k, double center_wavelength_um, double axial_pixel_um) {
    require(n_k >= 4 && n_k % 2 == 0, "grid: n_k must be even and >= 4");
    require(center_wavelength_um > 0 && axial_pixel_um > 0, "grid: wavelength and pixel size must be positive");
    const double k0 = 2.0 * std::numbers::pi / center_wavelength_um;
    const double dk = std::numbers::pi / (static_cast<double>(n_k) * axial_pixel_um);
    const double half = 0.5 * static_cast<double>(n_k - 1);
    std::vector<double> k(n_k);
    for (std::size_t j = 0; j < n_k; ++j) k[j] = k0 + (static_cast<double>(j) - half) * dk;
    require(k.front() > 0, "grid: k span exceeds the centre wavenumber");
    const double lam_lo = 2.0 * std::numbers::pi / k.back();
    const double lam_hi = 2.0 * std::numbers::pi / k.front();
    std::vector<double> lambda(n_k);
    for (std::size_t j = 0; j < n_k; ++j)
      lambda[j] = lam_lo + (lam_hi - lam_lo) * static_cast<double>(j) / static_cast<double>(n_k - 1);
    return WavenumberGrid(std::move(lambda), std::move(k), center_wavelength_um, axial_pixel_um);
  }

  /// Grid from explicit detector wavelengths. The uniform k axis spans
  /// [2π/λ_max, 2π/λ_min]. Non-monotone or descending wavelengths are
  /// accepted here and rejected by linearize_k.
  static WavenumberGrid from_wavelengths(std::vector<double> lambda_um, double axial_pixel_um) {
    require(lambda_um.size() >= 4, "grid: need at least 4 wavelength samples");
    const auto [lo, hi] = std::minmax_element(lambda_um.begin(), lambda_um.end());
    const double k_lo = 2.0 * std::numbers::pi / *hi;
    const double k_hi = 2.0 * std::numbers::pi / *lo;
    const std::size_t n = lambda_um.size();
    std::vector<double> k(n);
    for (std::size_t j = 0; j < n; ++j)
      k[j] = k_lo + (k_hi - k_lo) * static_cast<double>(j) / static_cast<double>(n - 1);
    const double center = 4.0 * std::numbers::pi / (k_lo + k_hi);
    return WavenumberGrid(std::move(lambda_um), std::move(k), center, axial_pixel_um);
  }

  std::size_t n_k() const noexcept { return k_uniform_.size(); }
  std::size_t n_z() const noexcept { return k_uniform_.size() / 2; }
  const std::vector<double>& lambda_samples() const noexcept { return lambda_; }
  const std::vector<double>& k_uniform() const noexcept { return k_uniform_; }
  double center_wavelength_um() const noexcept { return center_wavelength_um_; }
  double axial_pixel_um() const noexcept { return axial_pixel_um_; }

  /// Centre wavenumber: midpoint of the uniform k axis (rad/µm).
  double k0() const noexcept { return 0.5 * (k_uniform_.front() + k_uniform_.back()); }
  double k_span() const noexcept { return k_uniform_.back() - k_uniform_.front(); }
  double k_step() const noexcept { return k_span() / static_cast<double>(n_k() - 1); }

  /// Pixel-normalized coordinate of an arbitrary wavenumber.
  double u_of_k(double k) const noexcept { return (k - k0()) / (0.5 * k_span()); }
  /// Pixel-normalized coordinate of uniform sample j, in [-1, 1].
  double u(std::size_t j) const noexcept { return u_of_k(k_uniform_[j]); }

  std::vector<double> u_axis() const {
    std::vector<double> out(n_k());
    for (std::size_t j = 0; j < n_k(); ++j) out[j] = u(j);
    return out;
  }

  bool lambda_strictly_increasing() const noexcept {
    for (std::size_t j = 1; j < lambda_.size(); ++j)
      if (!(lambda_[j] > lambda_[j - 1])) return false;
    return true;
  }

 private:
  WavenumberGrid(std::vector<double> lambda, std::vector<double> k, double center, double pixel)
      : lambda_(std::move(lambda)), k_uniform_(std::move(k)), center_wavelength_um_(center), axial_pixel_um_(pixel) {}

  std::vector<double> lambda_;
  std::vector<double> k_uniform_;
  double center_wavelength_um_ = 0.0;
  double axial_pixel_um_ = 0.0;
};

enum class SpectralDomain { wavelength, k_linear };

/// Raw or k-linearized interference fringes, [n_k spectral samples × n_a A-lines].
struct Spectrogram {
  RealMatrix data;
  SpectralDomain domain = SpectralDomain::wavelength;

  std::size_t n_k() const noexcept { return data.rows(); }
  std::size_t n_a() const noexcept { return data.cols(); }
};

/// Phase polynomial coefficients (radians) in the pixel-normalized coordinate u.
struct DispersionCoefficients {
  double a2 = 0.0;
  double a3 = 0.0;

  bool is_zero() const noexcept { return a2 == 0.0 && a3 == 0.0; }
  bool finite() const noexcept { return std::isfinite(a2) && std::isfinite(a3); }
  friend bool operator==(const DispersionCoefficients&, const DispersionCoefficients&) = default;
};

inline constexpr double kDefaultCoefficientBound = 200.0;

inline void validate(const DispersionCoefficients& c, double bound = kDefaultCoefficientBound) {
  require(c.finite(), "dispersion coefficients must be finite");
  require(std::abs(c.a2) <= bound && std::abs(c.a3) <= bound, "dispersion coefficient exceeds bound");
}

/// Physical-unit form: phase = b2·(k−k0)² + b3·(k−k0)³ with k in rad/µm, so
/// b2 is in µm² and b3 in µm³ (radians implied).
struct PhysicalCoefficients {
  double b2_um2 = 0.0;
  double b3_um3 = 0.0;
};

inline PhysicalCoefficients to_physical(const DispersionCoefficients& c, const WavenumberGrid& grid) {
  const double h = 0.5 * grid.k_span();
  return {c.a2 / (h * h), c.a3 / (h * h * h)};
}

inline DispersionCoefficients from_physical(const PhysicalCoefficients& p, const WavenumberGrid& grid) {
  const double h = 0.5 * grid.k_span();
  return {p.b2_um2 * h * h, p.b3_um3 * h * h * h};
}

enum class ImageScale { linear, log_db };

/// Reconstructed image, [n_z depth × n_a lateral].
struct BScan {
  RealMatrix pixels;
  ImageScale scale = ImageScale::linear;
  double axial_pixel_um = 1.5;

  std::size_t n_z() const noexcept { return pixels.rows(); }
  std::size_t n_a() const noexcept { return pixels.cols(); }
};

struct NoWindow {};
struct HannWindow {};
/// Gaussian apodization exp(−u²/(2σ²)) in the pixel-normalized coordinate.
struct GaussianWindow {
  double sigma = 0.5;
};
using Window = std::variant<NoWindow, HannWindow, GaussianWindow>;

enum class BackgroundMode { column_mean, reference };
enum class Interpolation { linear, cubic };

struct ReconstructionConfig {
  Window window = NoWindow{};
  BackgroundMode background = BackgroundMode::column_mean;
  /// Used when background == reference; length n_k.
  std::vector<double> reference_spectrum;
  double log_floor_db = -50.0;
  Interpolation interpolation = Interpolation::cubic;
};

inline void validate(const ReconstructionConfig& cfg) {
  require(cfg.log_floor_db < 0.0, "log_floor_db must be negative");
  if (const auto* g = std::get_if<GaussianWindow>(&cfg.window)) require(g->sigma > 0, "gaussian window sigma must be positive");
}

}  // namespace octdisp
