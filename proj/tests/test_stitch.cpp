#include <gtest/gtest.h>

#include <filesystem>

#include "support.hpp"

using namespace octdisp;
using stitch::BandMap;
using stitch::ChannelStack;

namespace {

std::vector<double> a2_values(const std::vector<DispersionCoefficients>& c) {
  std::vector<double> out;
  for (const auto& x : c) out.push_back(x.a2);
  return out;
}

/// Ramp phantom setup shared by the stitching tests.
struct Ramp {
  sim::SourceSpec source;
  WavenumberGrid grid;
  ReconstructionConfig cfg;
  sim::Phantom phantom;
  Spectrogram prepared;
  AnalyticFrame frame;

  explicit Ramp(std::size_t n_k = 1024, std::size_t n_a = 8) {
    source.n_k = n_k;
    grid = sim::make_grid(source);
    cfg = testkit::reference_config(source, grid);
    phantom = sim::retina_phantom(grid, {.n_a = n_a});
    prepared = prepare_raw(sim::synthesize_spectrogram(phantom, source, {0.01, 12}, grid), grid, cfg);
    frame = make_analytic_frame(prepared, grid, cfg);
  }

  /// Equal-band profile with a2 = 10, 20, …, 50.
  opt::DispersionProfile ladder() const {
    opt::DispersionProfile p;
    const auto edges = opt::equal_band_edges(grid.n_z(), 5);
    for (std::size_t b = 0; b < 5; ++b) p.bands.push_back({edges[b], edges[b + 1], {10.0 * double(b + 1), 0.0}});
    return p;
  }
};

ChannelStack random_stack(std::size_t k, std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ChannelStack s;
  for (std::size_t i = 0; i < k; ++i) {
    s.channels.push_back(BScan{testkit::random_image(rows, cols, rng)});
    s.coeffs.push_back({double(i), 0.0});
  }
  return s;
}

}  // namespace

TEST(SelectChannelCoeffs, EqualSpacing) {
  EXPECT_EQ(a2_values(stitch::select_channel_coeffs({10, 0}, {50, 0}, 5)), (std::vector<double>{10, 20, 30, 40, 50}));
  EXPECT_EQ(a2_values(stitch::select_channel_coeffs({10, 0}, {50, 0}, 1)), (std::vector<double>{10}));
  EXPECT_EQ(a2_values(stitch::select_channel_coeffs({10, 0}, {50, 0}, 2)), (std::vector<double>{10, 50}));
  EXPECT_THROW(stitch::select_channel_coeffs({10, 0}, {50, 0}, 0), Error);
  const auto c = stitch::select_channel_coeffs({0, -2}, {8, 2}, 3);
  EXPECT_DOUBLE_EQ(c[1].a3, 0.0);
}

TEST(SelectChannelCoeffs, ThreeIsSubsetOfFive) {
  for (double lo : {-17.5, 3.0, 10.0})
    for (double hi : {33.3, 50.0, 91.0}) {
      const auto k3 = stitch::select_channel_coeffs({lo, 0}, {hi, 0}, 3);
      const auto k5 = stitch::select_channel_coeffs({lo, 0}, {hi, 0}, 5);
      EXPECT_EQ(k3[0], k5[0]);
      EXPECT_NEAR(k3[1].a2, k5[2].a2, 1e-12);
      EXPECT_EQ(k3[2], k5[4]);
    }
}

TEST(ReconstructChannels, SingleAndOrdering) {
  Ramp r(512, 4);
  const DispersionCoefficients one[] = {{25.0, 0.0}};
  const auto s = stitch::reconstruct_channels(r.prepared, one, r.grid, r.cfg);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.channels[0].pixels, reconstruct_bscan(r.prepared, one[0], r.grid, r.cfg).pixels);
  const DispersionCoefficients dup[] = {{10, 0}, {10, 0}};
  EXPECT_THROW(stitch::reconstruct_channels(r.prepared, dup, r.grid, r.cfg), Error);
  EXPECT_THROW(stitch::reconstruct_channels(r.prepared, std::span<const DispersionCoefficients>{}, r.grid, r.cfg),
               Error);
}

TEST(ReconstructChannels, EachChannelSharpestAtItsDepth) {
  Ramp r;
  const auto coeffs = stitch::select_channel_coeffs({10, 0}, {50, 0}, 5);
  const auto stack = stitch::reconstruct_channels(r.frame, coeffs, r.grid);
  auto width = [&](std::size_t channel, const sim::PhantomLayer& l) {
    return testkit::measure_layer(testkit::column_mean(stack.channels[channel]), testkit::layer_pixel(l, r.grid)).fwhm;
  };
  const auto& shallow = r.phantom.layers.front();
  const auto& deep = r.phantom.layers.back();
  for (std::size_t c = 1; c < 5; ++c) {
    EXPECT_LT(width(0, shallow), width(c, shallow));
    EXPECT_LT(width(4, deep), width(c - 1, deep));
  }
}

TEST(StitchGroundTruth, AllBandsFromOneChannelIsBitExact) {
  const auto stack = random_stack(3, 60, 7, 1);
  BandMap map;
  map.assignments = {{0, 20, 1}, {20, 45, 1}, {45, 60, 1}};
  EXPECT_EQ(stitch::stitch_ground_truth(stack, map).pixels, stack.channels[1].pixels);
}

TEST(StitchGroundTruth, HardSeamsCopyEachBand) {
  const auto stack = random_stack(3, 60, 7, 2);
  BandMap map;
  map.blend_px = 0;
  map.assignments = {{0, 20, 2}, {20, 45, 0}, {45, 60, 1}};
  const auto out = stitch::stitch_ground_truth(stack, map);
  for (const auto& a : map.assignments)
    for (std::size_t r = a.row_begin; r < a.row_end; ++r)
      for (std::size_t c = 0; c < 7; ++c) ASSERT_EQ(out.pixels(r, c), stack.channels[a.channel].pixels(r, c));
}

TEST(StitchGroundTruth, CrossFadeOnlyInsideBlendZone) {
  const auto stack = random_stack(2, 40, 3, 3);
  BandMap map;
  map.blend_px = 8;
  map.assignments = {{0, 20, 0}, {20, 40, 1}};
  const auto out = stitch::stitch_ground_truth(stack, map);
  for (std::size_t r = 0; r < 40; ++r)
    for (std::size_t c = 0; c < 3; ++c) {
      const double a = stack.channels[0].pixels(r, c), b = stack.channels[1].pixels(r, c);
      if (r < 16) {
        ASSERT_EQ(out.pixels(r, c), a);
      } else if (r >= 24) {
        ASSERT_EQ(out.pixels(r, c), b);
      } else {
        const double t = (double(r - 16) + 0.5) / 8.0;
        EXPECT_NEAR(out.pixels(r, c), (1 - t) * a + t * b, 1e-15);
      }
    }
}

TEST(StitchGroundTruth, Errors) {
  const auto stack = random_stack(2, 40, 3, 4);
  BandMap gap;
  gap.assignments = {{0, 19, 0}, {20, 40, 1}};
  EXPECT_THROW(stitch::stitch_ground_truth(stack, gap), Error);
  BandMap shallow_missing;
  shallow_missing.assignments = {{0, 30, 0}};
  EXPECT_THROW(stitch::stitch_ground_truth(stack, shallow_missing), Error);
  BandMap wide;
  wide.blend_px = 10;
  wide.assignments = {{0, 10, 0}, {10, 40, 1}};
  EXPECT_THROW(stitch::stitch_ground_truth(stack, wide), Error);
  BandMap missing_channel;
  missing_channel.assignments = {{0, 40, 2}};
  EXPECT_THROW(stitch::stitch_ground_truth(stack, missing_channel), Error);
}

TEST(StitchGroundTruth, RampLayersAtTransformLimitWhileSingleChannelsBroaden) {
  Ramp r;
  const double tl_px = sim::transform_limited_fwhm(r.source) / r.grid.axial_pixel_um();
  const auto profile = opt::search_depth_bands(r.prepared, 5, r.grid, r.cfg);
  const auto plan = stitch::plan_ground_truth(profile, r.grid.n_z());
  const auto stack = stitch::reconstruct_channels(r.frame, plan.coeffs, r.grid);
  const auto gt = stitch::stitch_ground_truth(stack, plan.map);
  const auto p = testkit::column_mean(gt);
  for (const auto& l : r.phantom.layers)
    EXPECT_NEAR(testkit::measure_layer(p, testkit::layer_pixel(l, r.grid)).fwhm / tl_px, 1.0, 0.10);
  for (const auto& ch : stack.channels) {
    const auto q = testkit::column_mean(ch);
    double worst = 0.0;
    for (const auto& l : r.phantom.layers)
      worst = std::max(worst, testkit::measure_layer(q, testkit::layer_pixel(l, r.grid)).fwhm);
    EXPECT_GT(worst, 1.5 * tl_px);
  }
}

TEST(StitchGroundTruth, SeamsAddNoSpikes) {
  // smooth lateral structure; compare the axial second difference across each
  // seam with its maximum inside the bands
  Ramp r(512, 16);
  const auto profile = r.ladder();
  const auto gt = stitch::assemble_ground_truth(r.frame, profile, r.grid);
  const auto edges = opt::equal_band_edges(r.grid.n_z(), 5);
  for (std::size_t c = 0; c < gt.n_a(); ++c) {
    double inside = 0.0, across = 0.0;
    for (std::size_t z = 1; z + 1 < gt.n_z(); ++z) {
      const double d2 = std::abs(gt.pixels(z + 1, c) - 2 * gt.pixels(z, c) + gt.pixels(z - 1, c));
      bool near_seam = false;
      for (std::size_t b = 1; b < 5; ++b)
        near_seam |= (z + 5 >= edges[b] && z <= edges[b] + 5);
      (near_seam ? across : inside) = std::max(near_seam ? across : inside, d2);
    }
    EXPECT_LE(across, 2.0 * inside) << c;
  }
}

TEST(PlanGroundTruth, UniqueSortedCoefficients) {
  opt::DispersionProfile p;
  p.bands = {{0, 10, {30, 0}}, {10, 20, {10, 0}}, {20, 30, {30, 0}}, {30, 40, {20, 0}}};
  const auto plan = stitch::plan_ground_truth(p, 40, 4);
  EXPECT_EQ(a2_values(plan.coeffs), (std::vector<double>{10, 20, 30}));
  ASSERT_EQ(plan.map.assignments.size(), 4u);
  EXPECT_EQ(plan.map.assignments[0].channel, 2u);
  EXPECT_EQ(plan.map.assignments[1].channel, 0u);
  EXPECT_EQ(plan.map.assignments[3].channel, 1u);
  EXPECT_EQ(plan.map.blend_px, 4u);
}

TEST(ProfileReconstruction, EqualsStitchOfPerCoefficientImages) {
  Ramp r(512, 6);
  const auto profile = r.ladder();
  const auto direct = stitch::reconstruct_bscan(r.prepared, profile, r.grid, r.cfg);
  std::vector<DispersionCoefficients> coeffs;
  for (const auto& b : profile.bands) coeffs.push_back(b.coeffs);
  ChannelStack stack;
  stack.coeffs = coeffs;
  for (const auto& c : coeffs) stack.channels.push_back(reconstruct_bscan(r.prepared, c, r.grid, r.cfg));
  BandMap map;
  for (std::size_t b = 0; b < 5; ++b) map.assignments.push_back({profile.bands[b].row_begin, profile.bands[b].row_end, b});
  EXPECT_EQ(direct.pixels, stitch::stitch_ground_truth(stack, map).pixels);
}

TEST(FuseBestBand, MatchedStackEqualsGroundTruth) {
  Ramp r(512, 6);
  const auto profile = r.ladder();
  const auto stack = stitch::reconstruct_channels(r.frame, stitch::select_channel_coeffs({10, 0}, {50, 0}, 5), r.grid);
  EXPECT_EQ(stitch::fuse_best_band(stack, profile).pixels, stitch::assemble_ground_truth(r.frame, profile, r.grid).pixels);
}

TEST(FuseBestBand, SingleChannelIsThatChannel) {
  Ramp r(512, 6);
  const auto stack = stitch::reconstruct_channels(r.frame, stitch::select_channel_coeffs({10, 0}, {50, 0}, 1), r.grid);
  EXPECT_EQ(stitch::fuse_best_band(stack, r.ladder()).pixels, stack.channels[0].pixels);
}

TEST(FuseBestBand, NearestChannelTiesGoLow) {
  auto stack = random_stack(3, 40, 2, 5);
  stack.coeffs = {{10, 0}, {30, 0}, {50, 0}};
  opt::DispersionProfile p;
  p.bands = {{0, 20, {20, 0}}, {20, 40, {41, 0}}};
  const auto out = stitch::fuse_best_band(stack, p, 0);
  EXPECT_EQ(out.pixels(5, 1), stack.channels[0].pixels(5, 1));
  EXPECT_EQ(out.pixels(30, 0), stack.channels[2].pixels(30, 0));
}

TEST(FuseBestBand, FidelityNondecreasingInChannelCount) {
  Ramp r(512, 256);
  const auto profile = r.ladder();
  const auto gt = stitch::assemble_ground_truth(r.frame, profile, r.grid);
  double previous = 0.0;
  for (std::size_t k : {1u, 3u, 5u}) {
    const auto stack = stitch::reconstruct_channels(r.frame, stitch::select_channel_coeffs({10, 0}, {50, 0}, k), r.grid);
    const double score = metrics::ms_ssim(gt.pixels, stitch::fuse_best_band(stack, profile).pixels);
    EXPECT_GE(score, previous) << k;
    previous = score;
  }
  EXPECT_EQ(previous, 1.0);
}

// ---------------------------------------------------------------------------
// Dataset emission
// ---------------------------------------------------------------------------

TEST(EmitDataset, CountsRoundTripAndManifest) {
  sim::SourceSpec source;
  source.n_k = 256;
  const auto grid = sim::make_grid(source);
  const auto cfg = testkit::reference_config(source, grid);
  std::vector<sim::Phantom> positions;
  for (std::uint64_t i = 0; i < 8; ++i)
    positions.push_back(sim::retina_phantom(grid, {.n_a = 32, .depth_jitter_fraction = 0.005, .jitter_seed = i}));
  const auto frames = sim::synthesize_volume(positions, source, {0.01, 3}, grid, 1);
  opt::DispersionProfile profile;
  const auto edges = opt::equal_band_edges(grid.n_z(), 5);
  for (std::size_t b = 0; b < 5; ++b) profile.bands.push_back({edges[b], edges[b + 1], {10.0 * double(b + 1), 0.0}});

  const auto dir = testkit::scratch_dir("emit");
  stitch::EmitOptions options;
  options.seed = 3;
  options.phantom_hash = stitch::fnv1a_hex("phantom");
  const auto m = stitch::emit_dataset(frames, grid, cfg, 5, {10, 0}, {50, 0}, profile, dir, options);

  std::size_t files = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) ++files;
  EXPECT_EQ(files, 8u * 2u + 1u);
  EXPECT_EQ(m.frame_count, 8u);

  const auto loaded = stitch::load_manifest(dir);
  EXPECT_EQ(loaded, m);
  for (std::size_t i = 0; i < 8; ++i) {
    const auto input = io::read_octbin(dir / loaded.frames[i].input);
    const auto gt = io::read_octbin(dir / loaded.frames[i].ground_truth);
    EXPECT_EQ(input.planes, 5u);
    EXPECT_EQ(gt.planes, 1u);
    EXPECT_EQ(input.rows, 128u);
    EXPECT_EQ(input.cols, 32u);
    // arrays equal the in-memory reconstructions rounded to float32
    const auto analytic = make_analytic_frame(prepare_raw(frames[i], grid, cfg), grid, cfg);
    const auto expected = stitch::assemble_ground_truth(analytic, profile, grid);
    for (std::size_t j = 0; j < expected.pixels.size(); ++j)
      ASSERT_EQ(gt.payload[j], static_cast<float>(expected.pixels.data()[j]));
    const auto ch2 = reconstruct_bscan(analytic, {30.0, 0.0}, grid);
    const auto plane = input.plane(2);
    for (std::size_t j = 0; j < plane.size(); ++j)
      ASSERT_EQ(static_cast<float>(plane.data()[j]), static_cast<float>(ch2.pixels.data()[j]));
  }
  std::filesystem::remove_all(dir);
}

TEST(EmitDataset, ChannelCountPolicy) {
  sim::SourceSpec source;
  source.n_k = 128;
  const auto grid = sim::make_grid(source);
  const auto cfg = testkit::reference_config(source, grid);
  const std::vector<Spectrogram> frames{
      sim::synthesize_spectrogram(sim::single_layer_phantom(30.0, 5.0, 4), source, {}, grid)};
  opt::DispersionProfile profile;
  profile.bands = {{0, 64, {5, 0}}};
  const auto dir = testkit::scratch_dir("emit_k");
  EXPECT_THROW(stitch::emit_dataset(frames, grid, cfg, 4, {0, 0}, {10, 0}, profile, dir), Error);
  EXPECT_THROW(stitch::emit_dataset(frames, grid, cfg, 0, {0, 0}, {10, 0}, profile, dir), Error);
  stitch::EmitOptions any;
  any.allow_any_k = true;
  EXPECT_EQ(stitch::emit_dataset(frames, grid, cfg, 4, {0, 0}, {10, 0}, profile, dir, any).k, 4u);
  for (std::size_t k : {1u, 3u, 5u, 7u, 9u}) EXPECT_TRUE(stitch::is_standard_channel_count(k));
  std::filesystem::remove_all(dir);
}

TEST(Manifest, StrictKeysAndConsistency) {
  stitch::DatasetManifest m;
  m.k = 1;
  m.channel_coeffs = {{10, 0}};
  m.ground_truth_profile.bands = {{0, 4, {10, 0}}};
  m.frame_count = 1;
  m.frames = {{"a", "b"}};
  auto j = stitch::to_json(m);
  EXPECT_EQ(stitch::manifest_from_json(j), m);
  auto extra = j;
  extra["surprise"] = 1;
  EXPECT_THROW(stitch::manifest_from_json(extra), Error);
  auto wrong = j;
  wrong["frame_count"] = 2;
  EXPECT_THROW(stitch::manifest_from_json(wrong), Error);
  EXPECT_THROW(stitch::load_manifest("/nonexistent/dir"), Error);
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(stitch::fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(stitch::fnv1a_hex("a"), "af63dc4c8601ec8c");
}
