#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "octdisp/core/error.hpp"
#include "octdisp/core/reconstruct.hpp"
#include "octdisp/opt/search.hpp"

namespace octdisp::stitch {

using opt::DepthBand;
using opt::DispersionProfile;

/// k reconstructions of one frame, channel i compensated with coeffs[i].
struct ChannelStack {
  std::vector<BScan> channels;
  std::vector<DispersionCoefficients> coeffs;

  std::size_t size() const noexcept { return channels.size(); }
};

inline void validate(const ChannelStack& s) {
  require(!s.channels.empty(), "channel stack: at least one channel required");
  require(s.channels.size() == s.coeffs.size(), "channel stack: one coefficient per channel required");
  for (std::size_t i = 0; i < s.channels.size(); ++i) {
    require(s.channels[i].scale == ImageScale::linear, "channel stack: channels must be linear scale");
    require(s.channels[i].pixels.same_shape(s.channels[0].pixels), "channel stack: channel dimensions differ");
    if (i > 0) require(s.coeffs[i].a2 > s.coeffs[i - 1].a2, "channel stack: coefficients must be strictly increasing in a2");
  }
}

/// Which channel serves each depth band, and the seam cross-fade width.
struct BandMap {
  struct Assignment {
    std::size_t row_begin = 0;
    std::size_t row_end = 0;
    std::size_t channel = 0;
  };
  std::vector<Assignment> assignments;
  std::size_t blend_px = 8;
};

inline constexpr std::size_t kDefaultBlendPx = 8;

inline void validate(const BandMap& map, std::size_t n_z, std::size_t n_channels) {
  require(!map.assignments.empty(), "band map: no bands", ErrorKind::invalid_argument);
  require(map.assignments.front().row_begin == 0, "band map: depth row 0 is not covered");
  require(map.assignments.back().row_end == n_z, "band map: deepest rows are not covered");
  std::size_t min_height = n_z;
  for (std::size_t b = 0; b < map.assignments.size(); ++b) {
    const auto& a = map.assignments[b];
    require(a.row_end > a.row_begin, "band map: empty band");
    if (b > 0) require(a.row_begin == map.assignments[b - 1].row_end, "band map: uncovered or overlapping depth rows");
    require(a.channel < n_channels, "band map: band references a missing channel");
    min_height = std::min(min_height, a.row_end - a.row_begin);
  }
  require(map.blend_px < min_height, "band map: blend width must be smaller than every band");
}

/// k coefficients equally spaced from c_lo to c_hi inclusive; k = 1 gives c_lo.
inline std::vector<DispersionCoefficients> select_channel_coeffs(const DispersionCoefficients& c_lo,
                                                                 const DispersionCoefficients& c_hi, std::size_t k) {
  require(k >= 1, "select_channel_coeffs: k must be >= 1");
  if (k == 1) return {c_lo};
  std::vector<DispersionCoefficients> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(k - 1);
    out[i] = {c_lo.a2 + (c_hi.a2 - c_lo.a2) * t, c_lo.a3 + (c_hi.a3 - c_lo.a3) * t};
  }
  out.back() = c_hi;
  return out;
}

inline ChannelStack reconstruct_channels(const AnalyticFrame& frame, std::span<const DispersionCoefficients> coeffs,
                                         const WavenumberGrid& grid) {
  require(!coeffs.empty(), "reconstruct_channels: at least one coefficient required");
  for (std::size_t i = 1; i < coeffs.size(); ++i)
    require(coeffs[i].a2 > coeffs[i - 1].a2, "reconstruct_channels: coefficients must be distinct and increasing in a2");
  ChannelStack stack;
  stack.coeffs.assign(coeffs.begin(), coeffs.end());
  for (const auto& c : coeffs) stack.channels.push_back(reconstruct_bscan(frame, c, grid));
  return stack;
}

inline ChannelStack reconstruct_channels(const Spectrogram& prepared, std::span<const DispersionCoefficients> coeffs,
                                         const WavenumberGrid& grid, const ReconstructionConfig& cfg) {
  require(!coeffs.empty(), "reconstruct_channels: at least one coefficient required");
  return reconstruct_channels(make_analytic_frame(prepared, grid, cfg), coeffs, grid);
}

/// Copies each band from its channel. Inside a zone of blend_px rows centred on
/// each seam the two neighbouring channels are cross-faded linearly; every
/// other row is copied bit-exact.
inline BScan stitch_ground_truth(const ChannelStack& stack, const BandMap& map) {
  validate(stack);
  const auto& first = stack.channels.front();
  const std::size_t n_z = first.n_z();
  const std::size_t n_a = first.n_a();
  validate(map, n_z, stack.size());

  BScan out{RealMatrix(n_z, n_a), ImageScale::linear, first.axial_pixel_um};
  for (const auto& a : map.assignments)
    for (std::size_t r = a.row_begin; r < a.row_end; ++r) {
      const auto src = stack.channels[a.channel].pixels.row(r);
      std::copy(src.begin(), src.end(), out.pixels.row(r).begin());
    }
  if (map.blend_px == 0) return out;

  const std::size_t half = map.blend_px / 2;
  for (std::size_t b = 1; b < map.assignments.size(); ++b) {
    const auto& upper = map.assignments[b - 1];
    const auto& lower = map.assignments[b];
    if (upper.channel == lower.channel) continue;
    const std::size_t seam = lower.row_begin;
    const std::size_t z0 = seam - half;
    for (std::size_t i = 0; i < map.blend_px; ++i) {
      const std::size_t r = z0 + i;
      const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(map.blend_px);
      const auto a = stack.channels[upper.channel].pixels.row(r);
      const auto c = stack.channels[lower.channel].pixels.row(r);
      auto dst = out.pixels.row(r);
      for (std::size_t col = 0; col < n_a; ++col) dst[col] = (1.0 - t) * a[col] + t * c[col];
    }
  }
  return out;
}

/// Distinct coefficients of a profile in increasing a2, and the band map that
/// assigns each band to its own coefficient's channel.
struct GroundTruthPlan {
  std::vector<DispersionCoefficients> coeffs;
  BandMap map;
};

inline GroundTruthPlan plan_ground_truth(const DispersionProfile& profile, std::size_t n_z,
                                         std::size_t blend_px = kDefaultBlendPx) {
  opt::validate(profile, n_z);
  GroundTruthPlan plan;
  for (const auto& b : profile.bands) plan.coeffs.push_back(b.coeffs);
  std::sort(plan.coeffs.begin(), plan.coeffs.end(), [](const auto& x, const auto& y) {
    return x.a2 < y.a2 || (x.a2 == y.a2 && x.a3 < y.a3);
  });
  plan.coeffs.erase(std::unique(plan.coeffs.begin(), plan.coeffs.end(),
                                [](const auto& x, const auto& y) { return x.a2 == y.a2; }),
                    plan.coeffs.end());
  plan.map.blend_px = blend_px;
  for (const auto& b : profile.bands) {
    const auto it = std::find_if(plan.coeffs.begin(), plan.coeffs.end(),
                                 [&](const auto& c) { return c.a2 == b.coeffs.a2; });
    plan.map.assignments.push_back({b.row_begin, b.row_end, static_cast<std::size_t>(it - plan.coeffs.begin())});
  }
  return plan;
}

/// All-depth compensated image: reconstruct once per profile coefficient and
/// stitch each band from its own reconstruction.
inline BScan assemble_ground_truth(const AnalyticFrame& frame, const DispersionProfile& profile,
                                   const WavenumberGrid& grid, std::size_t blend_px = kDefaultBlendPx) {
  const auto plan = plan_ground_truth(profile, grid.n_z(), blend_px);
  return stitch_ground_truth(reconstruct_channels(frame, plan.coeffs, grid), plan.map);
}

/// Depth-dependent reconstruction from a profile.
inline BScan reconstruct_bscan(const Spectrogram& prepared, const DispersionProfile& profile,
                               const WavenumberGrid& grid, const ReconstructionConfig& cfg,
                               std::size_t blend_px = kDefaultBlendPx) {
  return assemble_ground_truth(make_analytic_frame(prepared, grid, cfg), profile, grid, blend_px);
}

/// Non-learned fusion: each profile band takes the channel whose a2 is nearest
/// the band's coefficient (ties to the lower channel index).
inline BScan fuse_best_band(const ChannelStack& stack, const DispersionProfile& profile,
                            std::size_t blend_px = kDefaultBlendPx) {
  validate(stack);
  opt::validate(profile, stack.channels.front().n_z());
  BandMap map;
  map.blend_px = blend_px;
  for (const auto& b : profile.bands) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < stack.size(); ++i)
      if (std::abs(stack.coeffs[i].a2 - b.coeffs.a2) < std::abs(stack.coeffs[best].a2 - b.coeffs.a2)) best = i;
    map.assignments.push_back({b.row_begin, b.row_end, best});
  }
  return stitch_ground_truth(stack, map);
}

}  // namespace octdisp::stitch
