#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "octdisp/core/error.hpp"

namespace octdisp::fft {

using Complex = std::complex<double>;

enum class Direction { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

namespace detail {

// FFTW planning is not thread-safe; execution through the new-array interface
// is. Plans are created once per (size, direction) under a lock and never freed.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n, Direction dir) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(n, static_cast<int>(dir));
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<Complex> scratch_in(n), scratch_out(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(scratch_in.data()),
                                      reinterpret_cast<fftw_complex*>(scratch_out.data()), static_cast<int>(dir),
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    require(plan != nullptr, "FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  PlanCache() = default;
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalized DFT, out-of-place. Backward transforms are not scaled by 1/n.
inline void transform(std::span<const Complex> in, std::span<Complex> out, Direction dir) {
  require(in.size() == out.size() && !in.empty(), "fft: input and output sizes must match and be non-zero");
  fftw_plan plan = detail::PlanCache::instance().get(in.size(), dir);
  // new-array execute never writes to the input for out-of-place complex plans
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

inline std::vector<Complex> forward(std::span<const Complex> in) {
  std::vector<Complex> out(in.size());
  transform(in, out, Direction::forward);
  return out;
}

inline std::vector<Complex> inverse(std::span<const Complex> in) {
  std::vector<Complex> out(in.size());
  transform(in, out, Direction::backward);
  const double scale = 1.0 / static_cast<double>(in.size());
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace octdisp::fft
