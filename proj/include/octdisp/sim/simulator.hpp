#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "octdisp/core/error.hpp"
#include "octdisp/core/parallel.hpp"
#include "octdisp/core/types.hpp"

namespace octdisp::sim {

/// Broadband source with a Gaussian spectral envelope.
///
/// The envelope is Gaussian in wavenumber with FWHM Δk = 2π·Δλ/λ0², the
/// first-order equivalent of the wavelength bandwidth. It multiplies the
/// reference power to give I_r(k).
struct SourceSpec {
  std::size_t n_k = 2048;
  double center_wavelength_um = 0.840;
  double fwhm_bandwidth_um = 0.060;
  double reference_power = 1.0;
};

inline void validate(const SourceSpec& s) {
  require(s.n_k >= 4 && s.n_k % 2 == 0, "source: n_k must be even and >= 4");
  require(s.center_wavelength_um > 0, "source: center wavelength must be positive");
  require(s.fwhm_bandwidth_um > 0, "source: bandwidth must be positive");
  require(s.reference_power > 0, "source: reference power must be positive");
}

inline double source_fwhm_k(const SourceSpec& s) {
  return 2.0 * std::numbers::pi * s.fwhm_bandwidth_um / (s.center_wavelength_um * s.center_wavelength_um);
}

/// Normalized envelope at wavenumber k; strictly positive everywhere.
inline double envelope(const SourceSpec& s, double k) {
  const double k0 = 2.0 * std::numbers::pi / s.center_wavelength_um;
  const double d = (k - k0) / source_fwhm_k(s);
  return std::exp(-4.0 * std::numbers::ln2 * d * d);
}

/// Coherence-limited axial resolution (µm): (2·ln2/π)·λ0²/Δλ.
inline double transform_limited_fwhm(const SourceSpec& s) {
  validate(s);
  return 2.0 * std::numbers::ln2 / std::numbers::pi * s.center_wavelength_um * s.center_wavelength_um /
         s.fwhm_bandwidth_um;
}

/// Default grid for a source: 1.5 µm axial pixels.
inline WavenumberGrid make_grid(const SourceSpec& s, double axial_pixel_um = 1.5) {
  validate(s);
  return WavenumberGrid::make(s.n_k, s.center_wavelength_um, axial_pixel_um);
}

struct PhantomLayer {
  double depth_um = 0.0;     // single-pass depth; fringe phase is 2·k·depth
  double reflectivity = 1.0; // (0, 1]
  double a2_sample = 0.0;    // accumulated dispersive phase at this layer, rad
  double a3_sample = 0.0;
  double group_index = 1.0;  // unit conversion only
};

enum class LateralKind { constant, smooth_random };

/// Per-A-line reflectivity modulation applied independently to each layer.
struct LateralProfile {
  LateralKind kind = LateralKind::constant;
  std::uint64_t seed = 0;
  double modulation = 0.5;  // fraction of reflectivity that varies, [0, 1)
};

struct Phantom {
  std::vector<PhantomLayer> layers;
  LateralProfile lateral;
  std::size_t n_a = 300;
};

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

inline void validate(const Phantom& p, const WavenumberGrid& grid) {
  require(!p.layers.empty(), "phantom: at least one layer required");
  require(p.n_a >= 1, "phantom: n_a must be positive");
  require(p.lateral.modulation >= 0 && p.lateral.modulation < 1, "phantom: lateral modulation must be in [0, 1)");
  const double max_depth = static_cast<double>(grid.n_z()) * grid.axial_pixel_um();
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const auto& l = p.layers[i];
    require(l.depth_um > 0 && l.depth_um < max_depth,
            "phantom: layer " + std::to_string(i) + " depth outside the unambiguous range (0, " +
                std::to_string(max_depth) + ") um");
    require(l.reflectivity > 0 && l.reflectivity <= 1, "phantom: reflectivity must be in (0, 1]");
    require(std::isfinite(l.a2_sample) && std::isfinite(l.a3_sample), "phantom: non-finite dispersion");
    require(l.group_index > 0, "phantom: group index must be positive");
    if (i > 0) require(l.depth_um > p.layers[i - 1].depth_um, "phantom: layers must be sorted by strictly increasing depth");
  }
}

inline void validate(const NoiseSpec& n) { require(n.sigma >= 0 && std::isfinite(n.sigma), "noise: sigma must be >= 0"); }

/// Accumulated round-trip dispersive phase of a layer of given thickness for
/// material constants β″ (µm) and β‴ (µm²), in pixel-normalized radians.
inline DispersionCoefficients material_coefficients(double beta2_um, double beta3_um2, double thickness_um,
                                                    const WavenumberGrid& grid) {
  const double h = 0.5 * grid.k_span();
  const double path = 2.0 * thickness_um;
  return {beta2_um * path / 2.0 * h * h, beta3_um2 * path / 6.0 * h * h * h};
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Derived seed for stream `index` of a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return detail::splitmix64(base ^ detail::splitmix64(index + 0x632BE59BD9B4E019ull));
}

/// Lateral modulation of layer `layer` across n_a A-lines, values in (0, 1].
inline std::vector<double> lateral_modulation(const LateralProfile& lp, std::size_t layer, std::size_t n_a) {
  std::vector<double> m(n_a, 1.0);
  if (lp.kind == LateralKind::constant || lp.modulation == 0.0) return m;
  std::mt19937_64 rng(derive_seed(lp.seed, layer));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> amp(0.5, 1.0);
  constexpr int kHarmonics = 3;
  double phases[kHarmonics], amps[kHarmonics], total = 0.0;
  for (int h = 0; h < kHarmonics; ++h) {
    phases[h] = phase(rng);
    amps[h] = amp(rng) / (h + 1);
    total += amps[h];
  }
  for (std::size_t c = 0; c < n_a; ++c) {
    double s = 0.0;
    const double x = static_cast<double>(c) / static_cast<double>(n_a);
    for (int h = 0; h < kHarmonics; ++h) s += amps[h] * std::sin(2.0 * std::numbers::pi * (h + 1) * x + phases[h]);
    const double unit = 0.5 + 0.5 * s / total;  // [0, 1]
    m[c] = 1.0 - lp.modulation * unit;
  }
  return m;
}

/// Reference-arm spectrum I_r(k) on the detector (wavelength) rows.
inline std::vector<double> reference_spectrum(const SourceSpec& source, const WavenumberGrid& grid) {
  validate(source);
  require(grid.n_k() == source.n_k, "reference_spectrum: grid and source n_k differ");
  std::vector<double> out(grid.n_k());
  for (std::size_t j = 0; j < grid.n_k(); ++j)
    out[j] = source.reference_power * envelope(source, 2.0 * std::numbers::pi / grid.lambda_samples()[j]);
  return out;
}

/// Wavelength-sampled interference spectrogram:
///   S(k) = I_r(k) + 2·Σ_n sqrt(I_n(k)·I_r(k))·cos(2·k·z_n + a2_n·u² + a3_n·u³) + noise
/// with I_n(k) = R_n·m_n(x)·G(k)·P_r. Deterministic for a fixed noise seed.
inline Spectrogram synthesize_spectrogram(const Phantom& phantom, const SourceSpec& source, const NoiseSpec& noise,
                                          const WavenumberGrid& grid) {
  validate(source);
  validate(noise);
  require(grid.n_k() == source.n_k, "synthesize: grid and source n_k differ");
  validate(phantom, grid);

  const std::size_t n_k = grid.n_k();
  const std::size_t n_a = phantom.n_a;
  const std::size_t n_layers = phantom.layers.size();

  std::vector<double> k(n_k), g(n_k), u(n_k);
  for (std::size_t j = 0; j < n_k; ++j) {
    k[j] = 2.0 * std::numbers::pi / grid.lambda_samples()[j];
    g[j] = envelope(source, k[j]);
    u[j] = grid.u_of_k(k[j]);
  }

  // per-layer fringe on the detector rows, unit reflectivity
  std::vector<std::vector<double>> fringes(n_layers, std::vector<double>(n_k));
  std::vector<std::vector<double>> lateral(n_layers);
  for (std::size_t n = 0; n < n_layers; ++n) {
    const auto& l = phantom.layers[n];
    for (std::size_t j = 0; j < n_k; ++j) {
      const double phase = 2.0 * k[j] * l.depth_um + l.a2_sample * u[j] * u[j] + l.a3_sample * u[j] * u[j] * u[j];
      fringes[n][j] = 2.0 * source.reference_power * g[j] * std::cos(phase);
    }
    lateral[n] = lateral_modulation(phantom.lateral, n, n_a);
  }

  Spectrogram out{RealMatrix(n_k, n_a), SpectralDomain::wavelength};
  for (std::size_t c = 0; c < n_a; ++c) {
    for (std::size_t j = 0; j < n_k; ++j) {
      double s = source.reference_power * g[j];
      for (std::size_t n = 0; n < n_layers; ++n)
        s += std::sqrt(phantom.layers[n].reflectivity * lateral[n][c]) * fringes[n][j];
      out.data(j, c) = s;
    }
  }
  if (noise.sigma > 0) {
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> dist(0.0, noise.sigma);
    for (auto& v : out.data.data()) v += dist(rng);
  }
  return out;
}

/// Frames for a sequence of lateral positions, each repeated `repeats` times.
/// Order is position-major; repeats differ only in their noise seed.
inline std::vector<Spectrogram> synthesize_volume(std::span<const Phantom> positions, const SourceSpec& source,
                                                  const NoiseSpec& noise, const WavenumberGrid& grid,
                                                  std::size_t repeats) {
  require(repeats >= 1, "synthesize_volume: repeats must be >= 1");
  std::vector<Spectrogram> frames(positions.size() * repeats);
  parallel_for(frames.size(), [&](std::size_t i) {
    NoiseSpec n = noise;
    n.seed = derive_seed(noise.seed, i);
    frames[i] = synthesize_spectrogram(positions[i / repeats], source, n, grid);
  });
  return frames;
}

// ---------------------------------------------------------------------------
// Standard phantoms
// ---------------------------------------------------------------------------

/// Depth fractions of the retina-like phantom. The two deepest layers sit
/// close together, like the outer retinal bands.
inline constexpr double kRetinaDepthFractions[] = {0.12, 0.31, 0.50, 0.69, 0.83, 0.87};
inline constexpr double kRetinaReflectivities[] = {0.6, 0.35, 0.5, 0.4, 0.9, 1.0};

struct RetinaPhantomOptions {
  double a2_shallow = 10.0;
  double a2_deep = 50.0;
  std::size_t n_a = 300;
  LateralProfile lateral{};
  double depth_jitter_fraction = 0.0;   // uniform ±, relative to the depth range
  double reflectivity_jitter = 0.0;     // uniform ±, relative
  std::uint64_t jitter_seed = 0;
};

/// Six-layer phantom with dispersion ramping linearly in depth from
/// a2_shallow at the first layer to a2_deep at the last. Layer depths are
/// snapped to whole axial pixels.
inline Phantom retina_phantom(const WavenumberGrid& grid, const RetinaPhantomOptions& opt = {}) {
  const double range = static_cast<double>(grid.n_z()) * grid.axial_pixel_um();
  std::mt19937_64 rng(opt.jitter_seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Phantom p;
  p.n_a = opt.n_a;
  p.lateral = opt.lateral;
  const double f_first = kRetinaDepthFractions[0];
  const double f_last = kRetinaDepthFractions[std::size(kRetinaDepthFractions) - 1];
  for (std::size_t i = 0; i < std::size(kRetinaDepthFractions); ++i) {
    const double f = kRetinaDepthFractions[i];
    PhantomLayer l;
    const double depth = (f + opt.depth_jitter_fraction * unit(rng)) * range;
    l.depth_um = std::round(depth / grid.axial_pixel_um()) * grid.axial_pixel_um();
    l.reflectivity = std::clamp(kRetinaReflectivities[i] * (1.0 + opt.reflectivity_jitter * unit(rng)), 0.01, 1.0);
    l.a2_sample = opt.a2_shallow + (opt.a2_deep - opt.a2_shallow) * (f - f_first) / (f_last - f_first);
    l.group_index = 1.38;
    p.layers.push_back(l);
  }
  return p;
}

/// Single-reflector phantom.
inline Phantom single_layer_phantom(double depth_um, double a2_sample, std::size_t n_a = 1, double reflectivity = 1.0) {
  Phantom p;
  p.n_a = n_a;
  p.layers.push_back(PhantomLayer{depth_um, reflectivity, a2_sample, 0.0, 1.0});
  return p;
}

}  // namespace octdisp::sim
