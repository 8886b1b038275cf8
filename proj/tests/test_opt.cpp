#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace octdisp;
using opt::SearchConfig;
using opt::SharpnessConfig;
using opt::SharpnessMetric;

namespace {

double brute_threshold_count(const RealMatrix& m, double tau) {
  double mx = 0.0, s2 = 0.0;
  for (double p : m.data()) mx = std::max(mx, p * p);
  int n = 0;
  for (double p : m.data()) {
    s2 += p * p * p * p;
    if (p * p > tau * mx) ++n;
  }
  return s2 / n;
}

double brute_entropy(const RealMatrix& m) {
  double total = 0.0;
  for (double p : m.data()) total += p * p;
  double h = 0.0;
  for (double p : m.data())
    if (p != 0.0) h += (p * p / total) * std::log(p * p / total);
  return h;  // = −H
}

struct Prepared {
  sim::SourceSpec source;
  WavenumberGrid grid;
  ReconstructionConfig cfg;
  Spectrogram frame;
};

Prepared prepare(const sim::Phantom& p, std::size_t n_k, const sim::NoiseSpec& noise = {}) {
  Prepared out;
  out.source.n_k = n_k;
  out.grid = sim::make_grid(out.source);
  out.cfg = testkit::reference_config(out.source, out.grid);
  out.frame = prepare_raw(sim::synthesize_spectrogram(p, out.source, noise, out.grid), out.grid, out.cfg);
  return out;
}

}  // namespace

TEST(Sharpness, ImpulseBeatsSpreadEnergy) {
  BScan impulse{RealMatrix(9, 9)}, spread{RealMatrix(9, 9)};
  impulse.pixels(4, 4) = 3.0;
  for (int r = 3; r <= 5; ++r)
    for (int c = 3; c <= 5; ++c) spread.pixels(r, c) = 1.0;  // same Σ p²
  for (auto metric : {SharpnessMetric::threshold_count, SharpnessMetric::entropy}) {
    SharpnessConfig cfg;
    cfg.metric = metric;
    EXPECT_GT(opt::sharpness(impulse, cfg), opt::sharpness(spread, cfg));
  }
}

TEST(Sharpness, MatchesBruteForceOnRandomImages) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    BScan b{testkit::random_image(64, 64, rng)};
    SharpnessConfig tc;
    tc.threshold_fraction = 0.05 + 0.08 * trial;
    const double expected = brute_threshold_count(b.pixels, tc.threshold_fraction);
    EXPECT_LE(testkit::relative_error(opt::sharpness(b, tc), expected), 1e-9);
    SharpnessConfig en;
    en.metric = SharpnessMetric::entropy;
    EXPECT_LE(testkit::relative_error(opt::sharpness(b, en), brute_entropy(b.pixels)), 1e-9);
  }
}

TEST(Sharpness, RegionRestriction) {
  BScan b{RealMatrix(10, 4, 0.0)};
  b.pixels(2, 1) = 1.0;
  b.pixels(7, 1) = 5.0;
  SharpnessConfig cfg;
  cfg.region = opt::Region::rows(0, 5);
  EXPECT_DOUBLE_EQ(opt::sharpness(b, cfg), 1.0);
  cfg.region = opt::Region::rows(5, 10);
  EXPECT_DOUBLE_EQ(opt::sharpness(b, cfg), 625.0);
}

TEST(Sharpness, Errors) {
  SharpnessConfig cfg;
  EXPECT_THROW(opt::sharpness(BScan{RealMatrix(4, 4)}, cfg), Error);
  BScan b{RealMatrix(4, 4, 1.0)};
  cfg.region = opt::Region::rows(2, 2);
  EXPECT_THROW(opt::sharpness(b, cfg), Error);
  cfg.region = opt::Region::rows(0, 9);
  EXPECT_THROW(opt::sharpness(b, cfg), Error);
  cfg.region = {};
  cfg.threshold_fraction = 1.0;
  EXPECT_THROW(opt::sharpness(b, cfg), Error);
  b.scale = ImageScale::log_db;
  EXPECT_THROW(opt::sharpness(b, {}), Error);
}

TEST(SearchGlobal, RecoversInjectedCoefficient) {
  const auto p = prepare(sim::single_layer_phantom(420 * 1.5, 40.0, 4), 2048, {0.02, 3});
  const auto c = opt::search_global_a2(p.frame, p.grid, p.cfg);
  EXPECT_NEAR(c.a2, 40.0, 0.02 * 200.0);
  EXPECT_EQ(c.a3, 0.0);
}

TEST(SearchGlobal, ZeroDispersionStaysNearZero) {
  const auto p = prepare(sim::single_layer_phantom(300 * 1.5, 0.0, 4), 1024);
  const SearchConfig search;
  const auto c = opt::search_global_a2(p.frame, p.grid, p.cfg, {}, search);
  EXPECT_LE(std::abs(c.a2), (search.a2_hi - search.a2_lo) / double(search.grid_points - 1));
}

TEST(SearchGlobal, DegenerateRangeRejected) {
  const auto p = prepare(sim::single_layer_phantom(100.0, 0.0, 2), 256);
  SearchConfig s;
  s.a2_lo = s.a2_hi = 10.0;
  EXPECT_THROW(opt::search_global_a2(p.frame, p.grid, p.cfg, {}, s), Error);
  s.a2_lo = 20.0;
  EXPECT_THROW(opt::search_global_a2(p.frame, p.grid, p.cfg, {}, s), Error);
}

TEST(SearchGlobal, BeatsEveryCoarseCandidateAndIsDeterministic) {
  const auto p = prepare(sim::single_layer_phantom(250 * 1.5, -23.0, 4), 1024, {0.01, 5});
  const auto frame = make_analytic_frame(p.frame, p.grid, p.cfg);
  const auto trace = opt::search_a2(frame, p.grid, {}, {});
  for (double s : trace.grid_score) EXPECT_GE(trace.best_score, s);
  EXPECT_DOUBLE_EQ(trace.best_score, opt::sharpness(reconstruct_bscan(frame, {trace.best_a2, 0.0}, p.grid), {}));
  const auto again = opt::search_a2(frame, p.grid, {}, {});
  EXPECT_EQ(again.best_a2, trace.best_a2);
  EXPECT_EQ(again.grid_score, trace.grid_score);
}

TEST(SearchGlobal, ArgmaxInvariantToIntensityScale) {
  auto p = prepare(sim::single_layer_phantom(333 * 1.5, 27.0, 4), 1024, {0.01, 6});
  const auto base = opt::search_global_a2(p.frame, p.grid, p.cfg);
  for (double alpha : {0.01, 3.0, 250.0}) {
    auto scaled = p.frame;
    for (auto& v : scaled.data.data()) v *= alpha;
    EXPECT_NEAR(opt::search_global_a2(scaled, p.grid, p.cfg).a2, base.a2, 1e-6) << alpha;
  }
}

TEST(SearchGlobal, TiesPreferSmallestMagnitude) {
  // only the centre sample (u = 0) is nonzero, so the correction phasor is 1
  // there and every candidate reconstructs the same image
  std::vector<double> lambda(65);
  for (std::size_t j = 0; j < 65; ++j) lambda[j] = 0.8 + 0.001 * double(j);
  const auto grid = WavenumberGrid::from_wavelengths(lambda, 1.5);
  ASSERT_LT(std::abs(grid.u(32)), 1e-12);
  AnalyticFrame frame;
  frame.n_k = 65;
  frame.columns.assign(2, std::vector<Complex>(65, Complex{}));
  frame.columns[0][32] = {1.0, 0.5};
  frame.columns[1][32] = {0.25, 0.0};
  SearchConfig s;
  s.a2_lo = -33.0;
  s.a2_hi = 47.0;
  s.grid_points = 9;
  const auto trace = opt::search_a2(frame, grid, {}, s);
  for (double v : trace.grid_score) EXPECT_EQ(v, trace.grid_score.front());
  EXPECT_EQ(trace.best_a2, -3.0);
}

TEST(SearchBands, UniformDispersionAllBandsAgree) {
  sim::SourceSpec src;
  src.n_k = 1024;
  const auto grid = sim::make_grid(src);
  sim::Phantom ph;
  ph.n_a = 4;
  for (double f : {0.1, 0.3, 0.5, 0.7, 0.9}) ph.layers.push_back({std::round(f * 512) * 1.5, 0.8, 30.0, 0.0, 1.0});
  const auto p = prepare(ph, 1024, {0.01, 2});
  const auto profile = opt::search_depth_bands(p.frame, 5, p.grid, p.cfg);
  ASSERT_EQ(profile.bands.size(), 5u);
  for (const auto& b : profile.bands) EXPECT_NEAR(b.coeffs.a2, 30.0, 0.02 * 30.0);
  opt::validate(profile, 512);
}

TEST(SearchBands, RampIsMonotoneAndLayerAccurate) {
  sim::SourceSpec src;
  src.n_k = 1024;
  const auto grid = sim::make_grid(src);
  const auto phantom = sim::retina_phantom(grid, {.n_a = 8});
  const auto p = prepare(phantom, 1024, {0.01, 4});
  const auto profile = opt::search_depth_bands(p.frame, 5, p.grid, p.cfg);
  for (std::size_t b = 0; b < 5; ++b) {
    const auto& band = profile.bands[b];
    if (b > 0) {
      EXPECT_GE(band.coeffs.a2, profile.bands[b - 1].coeffs.a2);
    }
    for (const auto& l : phantom.layers) {
      const double px = testkit::layer_pixel(l, grid);
      if (px >= double(band.row_begin) && px < double(band.row_end)) {
        EXPECT_NEAR(band.coeffs.a2, l.a2_sample, 0.1 * l.a2_sample) << "band " << b;
      }
    }
  }
}

TEST(SearchBands, OneBandEqualsGlobalSearch) {
  const auto p = prepare(sim::single_layer_phantom(200 * 1.5, 18.0, 4), 1024, {0.01, 1});
  const auto profile = opt::search_depth_bands(p.frame, 1, p.grid, p.cfg);
  ASSERT_EQ(profile.bands.size(), 1u);
  EXPECT_EQ(profile.bands[0].coeffs, opt::search_global_a2(p.frame, p.grid, p.cfg));
  EXPECT_THROW(opt::search_depth_bands(p.frame, 513, p.grid, p.cfg), Error);
}

TEST(BandEdges, EqualPartition) {
  EXPECT_EQ(opt::equal_band_edges(256, 5), (std::vector<std::size_t>{0, 51, 102, 153, 204, 256}));
  EXPECT_EQ(opt::equal_band_edges(10, 10).back(), 10u);
  EXPECT_THROW(opt::equal_band_edges(4, 5), Error);
  EXPECT_THROW(opt::equal_band_edges(4, 0), Error);
}

TEST(Profile, Validation) {
  opt::DispersionProfile p;
  EXPECT_THROW(opt::validate(p, 10), Error);
  p.bands = {{0, 4, {}}, {5, 10, {}}};
  EXPECT_THROW(opt::validate(p, 10), Error);
  p.bands = {{0, 5, {}}, {5, 9, {}}};
  EXPECT_THROW(opt::validate(p, 10), Error);
  p.bands = {{0, 5, {}}, {5, 10, {1.0, 0.0}}};
  EXPECT_NO_THROW(opt::validate(p, 10));
}
