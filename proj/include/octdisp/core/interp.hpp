#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "octdisp/core/error.hpp"

namespace octdisp {

/// Precomputed linear map from samples on nonuniform knots to target abscissae.
/// Each target is a weighted sum of at most four source samples.
struct ResamplingPlan {
  std::size_t source_size = 0;
  std::vector<std::array<std::size_t, 4>> index;
  std::vector<std::array<double, 4>> weight;

  std::size_t target_size() const noexcept { return index.size(); }

  void apply(std::span<const double> source, std::span<double> target) const {
    require(source.size() == source_size && target.size() == index.size(), "resampling plan size mismatch");
    for (std::size_t t = 0; t < index.size(); ++t) {
      const auto& idx = index[t];
      const auto& w = weight[t];
      target[t] = w[0] * source[idx[0]] + w[1] * source[idx[1]] + w[2] * source[idx[2]] + w[3] * source[idx[3]];
    }
  }
};

/// Builds a plan for strictly increasing knots. order is 1 (linear) or 3
/// (4-point Lagrange). Targets outside the knot range extrapolate from the
/// edge stencil.
inline ResamplingPlan make_resampling_plan(std::span<const double> knots, std::span<const double> targets, int order) {
  require(order == 1 || order == 3, "interpolation order must be 1 or 3");
  const std::size_t n = knots.size();
  require(n >= 4, "need at least 4 knots");
  for (std::size_t i = 1; i < n; ++i) require(knots[i] > knots[i - 1], "knots must be strictly increasing");

  ResamplingPlan plan;
  plan.source_size = n;
  plan.index.resize(targets.size());
  plan.weight.resize(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double x = targets[t];
    // interval [i, i+1] containing x, clamped to the valid range
    auto it = std::upper_bound(knots.begin(), knots.end(), x);
    std::size_t i = (it == knots.begin()) ? 0 : static_cast<std::size_t>(it - knots.begin()) - 1;
    i = std::min(i, n - 2);

    auto& idx = plan.index[t];
    auto& w = plan.weight[t];
    if (order == 1) {
      const double f = (x - knots[i]) / (knots[i + 1] - knots[i]);
      idx = {i, i + 1, i + 1, i + 1};
      w = {1.0 - f, f, 0.0, 0.0};
      continue;
    }
    const std::size_t start = std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, n - 4);
    for (std::size_t a = 0; a < 4; ++a) {
      idx[a] = start + a;
      double l = 1.0;
      for (std::size_t b = 0; b < 4; ++b) {
        if (a == b) continue;
        l *= (x - knots[start + b]) / (knots[start + a] - knots[start + b]);
      }
      w[a] = l;
    }
  }
  return plan;
}

}  // namespace octdisp
