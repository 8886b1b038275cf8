#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "octdisp/core/error.hpp"
#include "octdisp/core/reconstruct.hpp"
#include "octdisp/core/types.hpp"

namespace octdisp::metrics {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 256-entry jet colormap, dark blue (0,0,0.5) to dark red (0.5,0,0).
inline const std::array<Rgb, 256>& jet_table() {
  static const std::array<Rgb, 256> table = [] {
    std::array<Rgb, 256> t{};
    auto channel = [](double x) { return std::clamp(1.5 - std::abs(x), 0.0, 1.0); };
    for (std::size_t i = 0; i < 256; ++i) {
      const double v = static_cast<double>(i) / 255.0;
      const double x = 4.0 * v - 2.0;  // blue peaks at −1, green at 0, red at +1
      const auto q = [](double c) { return static_cast<std::uint8_t>(std::lround(255.0 * c)); };
      t[i] = {q(channel(x - 1.0)), q(channel(x)), q(channel(x + 1.0))};
    }
    return t;
  }();
  return table;
}

struct ColorImage {
  std::size_t rows = 0, cols = 0;
  std::vector<Rgb> pixels;

  const Rgb& at(std::size_t r, std::size_t c) const { return pixels[r * cols + c]; }
};

/// Absolute difference normalized to [0, 1] by its maximum (all zero when the
/// images are identical).
inline RealMatrix normalized_abs_diff(const RealMatrix& f, const RealMatrix& g) {
  require(f.same_shape(g), "diff_map: image dimensions differ");
  RealMatrix d(f.rows(), f.cols());
  double peak = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    d.data()[i] = std::abs(f.data()[i] - g.data()[i]);
    peak = std::max(peak, d.data()[i]);
  }
  if (peak > 0.0)
    for (auto& v : d.data()) v /= peak;
  return d;
}

/// |f − g| through the jet colormap.
inline ColorImage diff_map(const RealMatrix& f, const RealMatrix& g) {
  const auto d = normalized_abs_diff(f, g);
  const auto& lut = jet_table();
  ColorImage out{d.rows(), d.cols(), std::vector<Rgb>(d.size())};
  for (std::size_t i = 0; i < d.size(); ++i)
    out.pixels[i] = lut[static_cast<std::size_t>(std::lround(d.data()[i] * 255.0))];
  return out;
}

// ---------------------------------------------------------------------------
// Axial profiles and peaks
// ---------------------------------------------------------------------------

struct Peak {
  std::size_t index = 0;     // sample of the local maximum
  double location = 0.0;     // parabolic sub-pixel refinement
  double height = 0.0;
  double prominence = 0.0;
  double fwhm = 0.0;         // px, linear interpolation at half height
  std::string label;
};

struct ProfileReport {
  std::vector<double> profile;
  std::vector<Peak> peaks;  // sorted by depth
  std::size_t column = 0;
  std::size_t n_cols = 1;
  std::size_t n_frames = 1;
};

/// Full width at half of profile[peak], interpolating linearly between the
/// samples that bracket the half level on each side. The walk stops at the
/// profile edge.
inline double fwhm_at(std::span<const double> profile, std::size_t peak) {
  require(peak < profile.size(), "fwhm: peak index out of range");
  const double half = 0.5 * profile[peak];
  double left = 0.0, right = static_cast<double>(profile.size() - 1);
  for (std::size_t i = peak; i > 0; --i)
    if (profile[i - 1] <= half) {
      const double a = profile[i - 1], b = profile[i];
      left = static_cast<double>(i - 1) + (half - a) / (b - a);
      break;
    }
  for (std::size_t i = peak; i + 1 < profile.size(); ++i)
    if (profile[i + 1] <= half) {
      const double a = profile[i], b = profile[i + 1];
      right = static_cast<double>(i) + (a - half) / (a - b);
      break;
    }
  return right - left;
}

/// Topographic prominence of a local maximum.
inline double prominence_at(std::span<const double> p, std::size_t peak) {
  const double h = p[peak];
  double left_min = h, right_min = h;
  for (std::size_t i = peak; i > 0; --i) {
    if (p[i - 1] > h) break;
    left_min = std::min(left_min, p[i - 1]);
  }
  for (std::size_t i = peak + 1; i < p.size(); ++i) {
    if (p[i] > h) break;
    right_min = std::min(right_min, p[i]);
  }
  return h - std::max(left_min, right_min);
}

/// Local maxima whose prominence is at least min_prominence_fraction of the
/// profile maximum.
inline std::vector<Peak> find_peaks(std::span<const double> p, double min_prominence_fraction = 0.1) {
  require(p.size() >= 3, "find_peaks: profile too short");
  const double top = *std::max_element(p.begin(), p.end());
  std::vector<Peak> peaks;
  if (top <= 0.0) return peaks;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool left_ok = (i == 0) || p[i] > p[i - 1];
    // plateaus: take the first sample, require a strict drop to the right eventually
    std::size_t j = i;
    while (j + 1 < p.size() && p[j + 1] == p[i]) ++j;
    const bool right_ok = (j + 1 == p.size()) || p[j + 1] < p[i];
    if (!left_ok || !right_ok) continue;
    const double prom = prominence_at(p, i);
    if (prom < min_prominence_fraction * top) continue;
    Peak pk;
    pk.index = i;
    pk.height = p[i];
    pk.prominence = prom;
    pk.location = static_cast<double>(i);
    if (i > 0 && i + 1 < p.size()) {
      const double a = p[i - 1], b = p[i], c = p[i + 1];
      const double denom = a - 2.0 * b + c;
      if (denom < 0.0) pk.location += 0.5 * (a - c) / denom;
    }
    pk.fwhm = fwhm_at(p, i);
    peaks.push_back(pk);
  }
  return peaks;
}

struct ProfileOptions {
  std::size_t n_cols = 5;
  std::size_t n_frames = 6;
  double min_prominence_fraction = 0.1;
  std::vector<std::string> labels;  // assigned to peaks shallow to deep
};

/// Linear-scale depth profile: average of the first n_frames frames, then of
/// n_cols adjacent A-lines centred on `column`.
inline ProfileReport axial_profile(std::span<const BScan> frames, std::size_t column, const ProfileOptions& opt = {}) {
  require(!frames.empty(), "axial_profile: no frames");
  require(opt.n_frames >= 1 && opt.n_cols >= 1, "axial_profile: n_frames and n_cols must be >= 1");
  require(frames.size() >= opt.n_frames, "axial_profile: fewer frames than n_frames");
  const auto avg = average_frames(frames.subspan(0, opt.n_frames));
  require(column < avg.n_a(), "axial_profile: column out of range");
  const std::size_t half = opt.n_cols / 2;
  require(column >= half && column - half + opt.n_cols <= avg.n_a(), "axial_profile: column window out of range");
  const std::size_t c0 = column - half;

  ProfileReport rep;
  rep.column = column;
  rep.n_cols = opt.n_cols;
  rep.n_frames = opt.n_frames;
  rep.profile.assign(avg.n_z(), 0.0);
  for (std::size_t z = 0; z < avg.n_z(); ++z) {
    double acc = 0.0;
    for (std::size_t c = c0; c < c0 + opt.n_cols; ++c) acc += avg.pixels(z, c);
    rep.profile[z] = acc / static_cast<double>(opt.n_cols);
  }
  rep.peaks = find_peaks(rep.profile, opt.min_prominence_fraction);
  for (std::size_t i = 0; i < rep.peaks.size() && i < opt.labels.size(); ++i) rep.peaks[i].label = opt.labels[i];
  return rep;
}

/// Peak of `peaks` closest to `location`, if any.
inline std::optional<Peak> nearest_peak(const std::vector<Peak>& peaks, double location) {
  std::optional<Peak> best;
  for (const auto& p : peaks)
    if (!best || std::abs(p.location - location) < std::abs(best->location - location)) best = p;
  return best;
}

}  // namespace octdisp::metrics
