#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "octdisp/core/error.hpp"
#include "octdisp/core/types.hpp"

namespace octdisp::opt {

enum class SharpnessMetric { threshold_count, entropy };

/// Rectangular image region, half-open. End values of 0 mean "to the edge".
struct Region {
  std::size_t row_begin = 0;
  std::size_t row_end = 0;
  std::size_t col_begin = 0;
  std::size_t col_end = 0;

  static Region rows(std::size_t begin, std::size_t end) { return {begin, end, 0, 0}; }
};

struct SharpnessConfig {
  SharpnessMetric metric = SharpnessMetric::threshold_count;
  double threshold_fraction = 0.1;
  Region region{};
};

inline void validate(const SharpnessConfig& cfg) {
  require(cfg.threshold_fraction > 0 && cfg.threshold_fraction < 1, "sharpness: threshold fraction must be in (0, 1)");
}

namespace detail {

struct ResolvedRegion {
  std::size_t r0, r1, c0, c1;
};

inline ResolvedRegion resolve(const Region& region, std::size_t rows, std::size_t cols) {
  ResolvedRegion r{region.row_begin, region.row_end == 0 ? rows : region.row_end, region.col_begin,
                   region.col_end == 0 ? cols : region.col_end};
  require(r.r1 <= rows && r.c1 <= cols, "sharpness: region exceeds image", ErrorKind::domain);
  require(r.r0 < r.r1 && r.c0 < r.c1, "sharpness: empty region", ErrorKind::domain);
  return r;
}

}  // namespace detail

/// Image sharpness; higher is sharper for both metrics.
///
/// Intensity is the squared linear pixel magnitude, I = p². Threshold-count
/// scores Σ I² over the region divided by the number of pixels with
/// I > τ·max(I). Entropy scores −H, with H = −Σ q·ln q and q = I / Σ I.
inline double sharpness(const BScan& image, const SharpnessConfig& cfg) {
  require(image.scale == ImageScale::linear, "sharpness: image must be linear scale");
  validate(cfg);
  const auto rr = detail::resolve(cfg.region, image.n_z(), image.n_a());
  const auto& px = image.pixels;

  double max_i = 0.0, sum_i = 0.0, sum_i2 = 0.0;
  for (std::size_t r = rr.r0; r < rr.r1; ++r)
    for (std::size_t c = rr.c0; c < rr.c1; ++c) {
      const double i = px(r, c) * px(r, c);
      max_i = std::max(max_i, i);
      sum_i += i;
      sum_i2 += i * i;
    }
  require(max_i > 0.0, "sharpness: all-zero region", ErrorKind::domain);

  if (cfg.metric == SharpnessMetric::threshold_count) {
    const double threshold = cfg.threshold_fraction * max_i;
    std::size_t count = 0;
    for (std::size_t r = rr.r0; r < rr.r1; ++r)
      for (std::size_t c = rr.c0; c < rr.c1; ++c)
        if (px(r, c) * px(r, c) > threshold) ++count;
    return sum_i2 / static_cast<double>(count);
  }

  double h = 0.0;
  for (std::size_t r = rr.r0; r < rr.r1; ++r)
    for (std::size_t c = rr.c0; c < rr.c1; ++c) {
      const double q = px(r, c) * px(r, c) / sum_i;
      if (q > 0.0) h -= q * std::log(q);
    }
  return -h;
}

}  // namespace octdisp::opt
