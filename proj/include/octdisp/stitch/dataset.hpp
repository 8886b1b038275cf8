#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "octdisp/core/error.hpp"
#include "octdisp/io/json_io.hpp"
#include "octdisp/io/octbin.hpp"
#include "octdisp/stitch/stitch.hpp"

namespace octdisp::stitch {

using nlohmann::json;

inline constexpr int kManifestVersion = 1;

inline bool is_standard_channel_count(std::size_t k) { return k == 1 || k == 3 || k == 5 || k == 7 || k == 9; }

/// FNV-1a 64-bit, hex-encoded.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct DatasetFrame {
  std::string input;         // relative to the dataset root
  std::string ground_truth;
  friend bool operator==(const DatasetFrame&, const DatasetFrame&) = default;
};

struct DatasetManifest {
  int version = kManifestVersion;
  std::size_t frame_count = 0;
  std::size_t rows = 0, cols = 0;
  std::size_t k = 0;
  std::vector<DispersionCoefficients> channel_coeffs;
  DispersionProfile ground_truth_profile;
  std::vector<DatasetFrame> frames;
  std::uint64_t seed = 0;
  std::string phantom_hash;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

inline json to_json(const DatasetManifest& m) {
  json coeffs = json::array();
  for (const auto& c : m.channel_coeffs) coeffs.push_back(io::coefficients_json(c));
  json frames = json::array();
  for (const auto& f : m.frames) frames.push_back({{"input", f.input}, {"ground_truth", f.ground_truth}});
  return {{"version", m.version},
          {"frame_count", m.frame_count},
          {"dims", {m.rows, m.cols}},
          {"k", m.k},
          {"channel_coefficients", coeffs},
          {"ground_truth_profile", io::to_json(m.ground_truth_profile)},
          {"frames", frames},
          {"seed", m.seed},
          {"phantom_hash", m.phantom_hash}};
}

inline DatasetManifest manifest_from_json(const json& j) {
  try {
    io::check_keys(j, {"version", "frame_count", "dims", "k", "channel_coefficients", "ground_truth_profile", "frames",
                       "seed", "phantom_hash"},
                   "manifest");
    DatasetManifest m;
    m.version = j.at("version").get<int>();
    require(m.version == kManifestVersion, "manifest: unsupported version", ErrorKind::format);
    m.frame_count = j.at("frame_count").get<std::size_t>();
    m.rows = j.at("dims").at(0).get<std::size_t>();
    m.cols = j.at("dims").at(1).get<std::size_t>();
    m.k = j.at("k").get<std::size_t>();
    for (const auto& c : j.at("channel_coefficients")) m.channel_coeffs.push_back(io::coefficients_from_json(c));
    m.ground_truth_profile = io::profile_from_json(j.at("ground_truth_profile"));
    for (const auto& f : j.at("frames"))
      m.frames.push_back({f.at("input").get<std::string>(), f.at("ground_truth").get<std::string>()});
    m.seed = j.value("seed", std::uint64_t{0});
    m.phantom_hash = j.value("phantom_hash", std::string{});
    require(m.frames.size() == m.frame_count, "manifest: frame_count does not match frames", ErrorKind::format);
    require(m.channel_coeffs.size() == m.k, "manifest: k does not match channel_coefficients", ErrorKind::format);
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::format, std::string("manifest: ") + e.what());
  }
}

struct EmitOptions {
  bool allow_any_k = false;
  std::size_t blend_px = kDefaultBlendPx;
  std::uint64_t seed = 0;
  std::string phantom_hash;
};

/// Writes, per frame, the k-channel input stack and the stitched ground truth,
/// then manifest.json:
///   out_dir/manifest.json
///   out_dir/frames/<idx>_input.octbin   (k planes)
///   out_dir/frames/<idx>_gt.octbin      (1 plane)
/// Frames are raw (wavelength-sampled) spectrograms.
inline DatasetManifest emit_dataset(std::span<const Spectrogram> frames, const WavenumberGrid& grid,
                                    const ReconstructionConfig& cfg, std::size_t k, const DispersionCoefficients& c_lo,
                                    const DispersionCoefficients& c_hi, const DispersionProfile& gt_profile,
                                    const std::filesystem::path& out_dir, const EmitOptions& options = {}) {
  require(!frames.empty(), "emit_dataset: empty volume");
  require(k >= 1, "emit_dataset: k must be >= 1");
  require(options.allow_any_k || is_standard_channel_count(k), "emit_dataset: k must be one of 1, 3, 5, 7, 9");
  opt::validate(gt_profile, grid.n_z());
  const auto coeffs = select_channel_coeffs(c_lo, c_hi, k);
  const auto plan = plan_ground_truth(gt_profile, grid.n_z(), options.blend_px);

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "frames", ec);
  require(!ec, "emit_dataset: cannot create " + (out_dir / "frames").string() + ": " + ec.message(), ErrorKind::io);

  DatasetManifest m;
  m.frame_count = frames.size();
  m.rows = grid.n_z();
  m.cols = frames.front().n_a();
  m.k = k;
  m.channel_coeffs = coeffs;
  m.ground_truth_profile = gt_profile;
  m.seed = options.seed;
  m.phantom_hash = options.phantom_hash;
  m.frames.resize(frames.size());

  parallel_for(frames.size(), [&](std::size_t i) {
    require(frames[i].n_a() == m.cols, "emit_dataset: frames differ in A-line count");
    const auto analytic = make_analytic_frame(prepare_raw(frames[i], grid, cfg), grid, cfg);
    const auto stack = reconstruct_channels(analytic, coeffs, grid);
    const auto gt = stitch_ground_truth(reconstruct_channels(analytic, plan.coeffs, grid), plan.map);

    char stem[32];
    std::snprintf(stem, sizeof stem, "%04zu", i);
    DatasetFrame entry{std::string("frames/") + stem + "_input.octbin", std::string("frames/") + stem + "_gt.octbin"};
    auto input = io::bscans_to_octbin(stack.channels, stack.coeffs);
    input.header["frame_index"] = i;
    io::write_octbin(out_dir / entry.input, input);
    const BScan gt_arr[] = {gt};
    auto gt_file = io::bscans_to_octbin(gt_arr);
    gt_file.header["frame_index"] = i;
    gt_file.header["ground_truth_profile"] = io::to_json(gt_profile);
    io::write_octbin(out_dir / entry.ground_truth, gt_file);
    m.frames[i] = entry;
  });

  io::write_file(out_dir / "manifest.json", to_json(m).dump(2) + "\n");
  return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& dataset_dir) {
  const auto text = io::read_file(dataset_dir / "manifest.json");
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::format, std::string("manifest: invalid JSON: ") + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace octdisp::stitch
