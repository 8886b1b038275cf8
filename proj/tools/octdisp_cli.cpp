// octdisp: simulate, reconstruct, search, stitch and score OCT B-scans.
//
// Every subcommand reads and writes OctBin files or JSON documents. Errors go
// to stderr as {"error": {"kind": ..., "message": ...}}. Exit codes: 0 ok,
// 1 internal, 2 usage, 3-7 per ErrorKind (see exit_code).

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "octdisp/io/png.hpp"
#include "octdisp/octdisp.hpp"

namespace {

using namespace octdisp;
using io::json;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return 3;
    case ErrorKind::domain: return 4;
    case ErrorKind::format: return 5;
    case ErrorKind::io: return 6;
    case ErrorKind::schema: return 7;
  }
  return kExitInternal;
}

int report_error(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
  return code;
}

json read_json(const std::filesystem::path& path) {
  const auto text = io::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::schema, path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) { io::write_file(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
  std::uint64_t seed = 0;
  sim::SourceSpec source;
  double axial_pixel_um = 1.5;
  json phantom;  // normalized phantom spec, kept for the header and hash
  sim::NoiseSpec noise;
  std::size_t positions = 1, repeats = 1;
  ReconstructionConfig reconstruction;
  json search = json::object();
};

RunConfig run_config_from_json(const json& j) {
  io::check_keys(j, {"seed", "source", "axial_pixel_um", "phantom", "noise", "volume", "reconstruction", "search"},
                 "config");
  require(j.contains("seed"), "config: seed is required", ErrorKind::schema);
  require(j.contains("phantom"), "config: phantom is required", ErrorKind::schema);
  RunConfig c;
  c.seed = io::get_or<std::uint64_t>(j, "seed", 0, "config");
  if (j.contains("source")) c.source = io::source_from_json(j["source"]);
  c.axial_pixel_um = io::get_or(j, "axial_pixel_um", c.axial_pixel_um, "config");
  require(c.axial_pixel_um > 0, "config: axial_pixel_um must be positive", ErrorKind::schema);
  c.phantom = j["phantom"];
  const auto kind = io::get_or<std::string>(c.phantom, "kind", "", "phantom");
  if (kind == "retina") {
    io::check_keys(c.phantom,
                   {"kind", "a2_shallow", "a2_deep", "n_a", "lateral", "depth_jitter_fraction", "reflectivity_jitter"},
                   "phantom");
    if (c.phantom.contains("lateral")) io::lateral_from_json(c.phantom["lateral"]);
  } else if (kind == "layers") {
    json rest = c.phantom;
    rest.erase("kind");
    io::phantom_from_json(rest);
  } else {
    fail(ErrorKind::schema, "phantom: kind must be retina or layers");
  }
  c.noise.seed = sim::derive_seed(c.seed, 0);
  if (j.contains("noise")) {
    const auto n = io::noise_from_json(j["noise"]);
    c.noise.sigma = n.sigma;
    if (j["noise"].contains("seed")) c.noise.seed = n.seed;
  }
  if (j.contains("volume")) {
    io::check_keys(j["volume"], {"positions", "repeats"}, "volume");
    c.positions = io::get_or<std::size_t>(j["volume"], "positions", 1, "volume");
    c.repeats = io::get_or<std::size_t>(j["volume"], "repeats", 1, "volume");
    require(c.positions >= 1 && c.repeats >= 1, "volume: positions and repeats must be >= 1", ErrorKind::schema);
  }
  if (j.contains("reconstruction")) c.reconstruction = io::reconstruction_from_json(j["reconstruction"]);
  if (j.contains("search")) {
    io::search_from_json(j["search"]);
    io::sharpness_from_json(j["search"]);
    c.search = j["search"];
  }
  return c;
}

/// Phantom for lateral position `pos`; retina jitter and lateral texture are
/// seeded per position from the run seed.
sim::Phantom phantom_at(const RunConfig& c, const WavenumberGrid& grid, std::size_t pos) {
  const std::uint64_t pos_seed = sim::derive_seed(c.seed, 1 + pos);
  const json& p = c.phantom;
  sim::LateralProfile lateral;
  if (p.contains("lateral")) lateral = io::lateral_from_json(p["lateral"]);
  if (!(p.contains("lateral") && p["lateral"].contains("seed"))) lateral.seed = pos_seed;
  if (p["kind"] == "retina") {
    sim::RetinaPhantomOptions o;
    o.a2_shallow = io::get_or(p, "a2_shallow", o.a2_shallow, "phantom");
    o.a2_deep = io::get_or(p, "a2_deep", o.a2_deep, "phantom");
    o.n_a = io::get_or<std::size_t>(p, "n_a", o.n_a, "phantom");
    o.depth_jitter_fraction = io::get_or(p, "depth_jitter_fraction", 0.0, "phantom");
    o.reflectivity_jitter = io::get_or(p, "reflectivity_jitter", 0.0, "phantom");
    o.jitter_seed = pos_seed;
    o.lateral = lateral;
    return sim::retina_phantom(grid, o);
  }
  json rest = p;
  rest.erase("kind");
  auto out = io::phantom_from_json(rest);
  out.lateral = lateral;
  return out;
}

// ---------------------------------------------------------------------------
// Raw volumes
// ---------------------------------------------------------------------------

struct RawVolume {
  sim::SourceSpec source;
  WavenumberGrid grid;
  ReconstructionConfig cfg;
  json header;
  std::vector<Spectrogram> frames;
};

RawVolume load_raw(const std::filesystem::path& path) {
  const auto f = io::read_octbin(path);
  RawVolume v;
  v.header = f.header;
  require(f.header.contains("source") && f.header.contains("reconstruction"),
          path.string() + ": not a simulated raw volume (source/reconstruction missing)", ErrorKind::format);
  v.source = io::source_from_json(f.header["source"]);
  v.grid = sim::make_grid(v.source, f.header.value("axial_pixel_um", 1.5));
  v.cfg = io::reconstruction_from_json(f.header["reconstruction"]);
  if (f.header.contains("reference_spectrum"))
    v.cfg.reference_spectrum = f.header["reference_spectrum"].get<std::vector<double>>();
  v.frames = io::octbin_to_spectrograms(f);
  require(v.frames.front().n_k() == v.grid.n_k(), path.string() + ": spectral length does not match source.n_k",
          ErrorKind::format);
  return v;
}

std::vector<Spectrogram> prepare_all(const RawVolume& v) {
  std::vector<Spectrogram> out(v.frames.size());
  parallel_for(v.frames.size(), [&](std::size_t i) { out[i] = prepare_raw(v.frames[i], v.grid, v.cfg); });
  return out;
}

io::OctBinFile image_file(std::span<const BScan> images, const json& raw_header, const json& extra) {
  auto f = io::bscans_to_octbin(images);
  for (const char* key : {"seed", "phantom_hash"})
    if (raw_header.contains(key)) f.header[key] = raw_header[key];
  for (const auto& [k, v] : extra.items()) f.header[k] = v;
  return f;
}

opt::DispersionProfile load_profile(const std::filesystem::path& path) { return io::profile_from_json(read_json(path)); }

std::vector<BScan> read_images(const std::filesystem::path& path) { return io::octbin_to_bscans(io::read_octbin(path)); }

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void cmd_simulate(const std::string& config_path, const std::string& out) {
  const auto cfg = run_config_from_json(read_json(config_path));
  const auto grid = sim::make_grid(cfg.source, cfg.axial_pixel_um);
  std::vector<sim::Phantom> positions;
  for (std::size_t p = 0; p < cfg.positions; ++p) positions.push_back(phantom_at(cfg, grid, p));
  const auto frames = sim::synthesize_volume(positions, cfg.source, cfg.noise, grid, cfg.repeats);

  auto f = io::spectrograms_to_octbin(frames);
  const auto phantom_text = cfg.phantom.dump();
  f.header["source"] = io::to_json(cfg.source);
  f.header["axial_pixel_um"] = cfg.axial_pixel_um;
  f.header["reconstruction"] = io::to_json(cfg.reconstruction);
  f.header["reference_spectrum"] = sim::reference_spectrum(cfg.source, grid);
  f.header["search"] = cfg.search;
  f.header["seed"] = cfg.seed;
  f.header["phantom"] = cfg.phantom;
  f.header["phantom_hash"] = stitch::fnv1a_hex(phantom_text);
  f.header["noise"] = io::to_json(cfg.noise);
  f.header["volume"] = {{"positions", cfg.positions}, {"repeats", cfg.repeats}};
  json layers = json::array();
  for (const auto& p : positions) layers.push_back(io::to_json(p)["layers"]);
  f.header["layers"] = layers;
  io::write_octbin(out, f);
}

void write_pngs(const std::string& png, std::span<const BScan> images, double floor_db) {
  for (std::size_t i = 0; i < images.size(); ++i) {
    std::filesystem::path path = png;
    if (images.size() > 1) {
      char suffix[32];
      std::snprintf(suffix, sizeof suffix, "_%04zu", i);
      path = path.parent_path() / (path.stem().string() + suffix + path.extension().string());
    }
    io::write_log_png(path, log_display(images[i], floor_db), floor_db);
  }
}

void cmd_reconstruct(const std::string& in, std::optional<double> a2, double a3, const std::string& profile_path,
                     std::size_t blend, const std::string& out, const std::string& png, bool log) {
  const auto vol = load_raw(in);
  const auto prepared = prepare_all(vol);
  std::vector<BScan> images(prepared.size());
  json extra;
  if (!profile_path.empty()) {
    const auto profile = load_profile(profile_path);
    parallel_for(prepared.size(), [&](std::size_t i) {
      images[i] = stitch::reconstruct_bscan(prepared[i], profile, vol.grid, vol.cfg, blend);
    });
    extra["profile"] = io::to_json(profile);
  } else {
    const DispersionCoefficients c{*a2, a3};
    parallel_for(prepared.size(), [&](std::size_t i) { images[i] = reconstruct_bscan(prepared[i], c, vol.grid, vol.cfg); });
    extra["coefficients"] = json::array({io::coefficients_json(c)});
  }
  if (!png.empty()) write_pngs(png, images, vol.cfg.log_floor_db);
  if (log)
    for (auto& b : images) b = log_display(b, vol.cfg.log_floor_db);
  io::write_octbin(out, image_file(images, vol.header, extra));
}

void cmd_search(const std::string& in, std::size_t bands, std::size_t frame, const std::string& out) {
  const auto vol = load_raw(in);
  require(frame < vol.frames.size(), "search: frame index out of range");
  const json s = vol.header.value("search", json::object());
  const auto search = io::search_from_json(s);
  const auto sharp = io::sharpness_from_json(s);
  const auto prepared = prepare_raw(vol.frames[frame], vol.grid, vol.cfg);
  const auto profile = opt::search_depth_bands(prepared, bands, vol.grid, vol.cfg, sharp, search);
  write_json(out, io::to_json(profile));
}

void cmd_stitch(const std::string& in, const std::string& profile_path, std::size_t blend, const std::string& out) {
  const auto vol = load_raw(in);
  const auto profile = load_profile(profile_path);
  std::vector<BScan> images(vol.frames.size());
  parallel_for(vol.frames.size(), [&](std::size_t i) {
    const auto frame = make_analytic_frame(prepare_raw(vol.frames[i], vol.grid, vol.cfg), vol.grid, vol.cfg);
    images[i] = stitch::assemble_ground_truth(frame, profile, vol.grid, blend);
  });
  io::write_octbin(out, image_file(images, vol.header, {{"ground_truth_profile", io::to_json(profile)}}));
}

void cmd_fuse(const std::string& stack_path, const std::string& profile_path, std::size_t blend, const std::string& out) {
  const auto f = io::read_octbin(stack_path);
  require(f.header.contains("coefficients") && f.header["coefficients"].size() == f.planes,
          stack_path + ": channel stack needs one coefficient entry per plane", ErrorKind::format);
  stitch::ChannelStack stack;
  stack.channels = io::octbin_to_bscans(f);
  for (const auto& c : f.header["coefficients"]) stack.coeffs.push_back(io::coefficients_from_json(c));
  const auto profile = load_profile(profile_path);
  const BScan fused[] = {stitch::fuse_best_band(stack, profile, blend)};
  io::write_octbin(out, image_file(fused, f.header, {{"fused_from", f.planes}}));
}

void cmd_emit(const std::string& in, std::size_t k, const std::string& profile_path, const std::string& out_dir,
              std::optional<double> c_lo, std::optional<double> c_hi, bool allow_any_k, std::size_t blend) {
  const auto vol = load_raw(in);
  const auto profile = load_profile(profile_path);
  opt::validate(profile, vol.grid.n_z());
  double lo = profile.bands.front().coeffs.a2, hi = lo;
  for (const auto& b : profile.bands) {
    lo = std::min(lo, b.coeffs.a2);
    hi = std::max(hi, b.coeffs.a2);
  }
  stitch::EmitOptions o;
  o.allow_any_k = allow_any_k;
  o.blend_px = blend;
  o.seed = vol.header.value("seed", std::uint64_t{0});
  o.phantom_hash = vol.header.value("phantom_hash", std::string{});
  stitch::emit_dataset(vol.frames, vol.grid, vol.cfg, k, {c_lo.value_or(lo), 0.0}, {c_hi.value_or(hi), 0.0}, profile,
                       out_dir, o);
}

void cmd_metrics(const std::string& gt_path, const std::string& test_path, const std::string& out,
                 const std::string& diff_png, std::size_t scales) {
  const auto gt = read_images(gt_path);
  const auto test = read_images(test_path);
  require(gt.size() == test.size() || gt.size() == 1,
          "metrics: ground truth must have one plane or as many planes as the test file");
  metrics::MsSsimConfig cfg;
  cfg.scales = scales;
  json reports = json::array();
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& g = gt[gt.size() == 1 ? 0 : i];
    reports.push_back(metrics::to_json(metrics::evaluate(g.pixels, test[i].pixels, cfg, std::to_string(i))));
  }
  if (!diff_png.empty()) io::write_color_png(diff_png, metrics::diff_map(gt.front().pixels, test.front().pixels));
  // file names only, so reports do not depend on the working directory
  write_json(out, {{"ground_truth", std::filesystem::path(gt_path).filename().string()},
                   {"test", std::filesystem::path(test_path).filename().string()},
                   {"reports", reports}});
}

void cmd_profile(const std::vector<std::string>& inputs, std::size_t column, const metrics::ProfileOptions& opt,
                 const std::string& out, const std::string& csv) {
  json profiles = json::array();
  std::vector<metrics::ProfileReport> reps;
  for (const auto& path : inputs) {
    const auto images = read_images(path);
    auto o = opt;
    o.n_frames = std::min(o.n_frames, images.size());
    reps.push_back(metrics::axial_profile(images, column, o));
    auto j = io::to_json(reps.back());
    j["file"] = std::filesystem::path(path).filename().string();
    profiles.push_back(j);
  }
  write_json(out, {{"profiles", profiles}});
  if (!csv.empty()) {
    std::ostringstream s;
    s.precision(17);
    s << "z_px";
    for (std::size_t i = 0; i < reps.size(); ++i) s << ",profile_" << i;
    s << "\n";
    for (std::size_t z = 0; z < reps.front().profile.size(); ++z) {
      s << z;
      for (const auto& r : reps) s << "," << (z < r.profile.size() ? r.profile[z] : 0.0);
      s << "\n";
    }
    io::write_file(csv, s.str());
  }
}

std::vector<std::string> split_labels(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  for (std::string item; std::getline(s, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dispersion-compensated OCT reconstruction toolkit"};
  app.require_subcommand(1);

  std::string in, out, config, profile, png, diff_png, csv, labels, stack, gt, test, out_dir;
  std::optional<double> a2, c_lo, c_hi;
  double a3 = 0.0;
  std::size_t bands = 5, frame = 0, k = 5, blend = stitch::kDefaultBlendPx, column = 0, scales = 5;
  bool log = false, allow_any_k = false;
  std::vector<std::string> inputs;
  metrics::ProfileOptions popt;

  auto* sim_cmd = app.add_subcommand("simulate", "Synthesize a raw spectrogram volume from a run config");
  sim_cmd->add_option("--config", config, "Run config JSON")->required();
  sim_cmd->add_option("--out", out, "Output raw OctBin")->required();

  auto* rec = app.add_subcommand("reconstruct", "Reconstruct B-scans with one coefficient pair or a profile");
  rec->add_option("--in", in, "Raw OctBin")->required();
  auto* a2_opt = rec->add_option("--a2", a2, "Quadratic coefficient (rad)");
  rec->add_option("--a3", a3, "Cubic coefficient (rad)")->needs(a2_opt);
  auto* prof_opt = rec->add_option("--profile", profile, "Dispersion profile JSON");
  a2_opt->excludes(prof_opt);
  rec->add_option("--blend", blend, "Seam blend width (px) for --profile");
  rec->add_option("--out", out, "Output image OctBin")->required();
  rec->add_option("--png", png, "Log-display PNG (per-frame suffix when several frames)");
  rec->add_flag("--log", log, "Store log-scaled images instead of linear magnitude");

  auto* search = app.add_subcommand("search", "Find per-band dispersion coefficients");
  search->add_option("--in", in, "Raw OctBin")->required();
  search->add_option("--bands", bands, "Number of equal depth bands")->check(CLI::PositiveNumber);
  search->add_option("--frame", frame, "Frame index to search on");
  search->add_option("--out", out, "Output profile JSON")->required();

  auto* st = app.add_subcommand("stitch", "Assemble the all-depth compensated ground truth");
  st->add_option("--in", in, "Raw OctBin")->required();
  st->add_option("--profile", profile, "Dispersion profile JSON")->required();
  st->add_option("--blend", blend, "Seam blend width (px)");
  st->add_option("--out", out, "Output image OctBin")->required();

  auto* fuse = app.add_subcommand("fuse", "Fuse a channel stack by nearest-coefficient band selection");
  fuse->add_option("--stack", stack, "Channel stack OctBin (one plane per channel)")->required();
  fuse->add_option("--profile", profile, "Dispersion profile JSON")->required();
  fuse->add_option("--blend", blend, "Seam blend width (px)");
  fuse->add_option("--out", out, "Output image OctBin")->required();

  auto* emit = app.add_subcommand("emit-dataset", "Write k-channel inputs, ground truth and manifest");
  emit->add_option("--in", in, "Raw OctBin")->required();
  emit->add_option("--k", k, "Channels per frame")->required();
  emit->add_option("--profile", profile, "Ground-truth dispersion profile JSON")->required();
  emit->add_option("--out-dir", out_dir, "Dataset directory")->required();
  emit->add_option("--c-lo", c_lo, "Lowest channel a2 (default: smallest profile a2)");
  emit->add_option("--c-hi", c_hi, "Highest channel a2 (default: largest profile a2)");
  emit->add_flag("--allow-any-k", allow_any_k, "Accept channel counts other than 1, 3, 5, 7, 9");
  emit->add_option("--blend", blend, "Seam blend width (px)");

  auto* met = app.add_subcommand("metrics", "PSNR and MS-SSIM of test planes against ground truth");
  met->add_option("--gt", gt, "Ground-truth image OctBin")->required();
  met->add_option("--test", test, "Test image OctBin")->required();
  met->add_option("--out", out, "Output report JSON")->required();
  met->add_option("--diff-png", diff_png, "Jet-colored |gt - test| of the first plane");
  met->add_option("--scales", scales, "MS-SSIM scale count")->check(CLI::PositiveNumber);

  auto* prof = app.add_subcommand("profile", "Axial depth profile with peak widths");
  prof->add_option("--in", inputs, "Image OctBin file(s)")->required();
  prof->add_option("--column", column, "Centre A-line")->required();
  prof->add_option("--n-cols", popt.n_cols, "Adjacent A-lines averaged");
  prof->add_option("--n-frames", popt.n_frames, "Frames averaged (capped at the file's plane count)");
  prof->add_option("--min-prominence", popt.min_prominence_fraction, "Peak prominence threshold, fraction of max");
  prof->add_option("--labels", labels, "Comma-separated peak labels, shallow to deep");
  prof->add_option("--out", out, "Output report JSON")->required();
  prof->add_option("--csv", csv, "Also write the profiles as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kExitUsage);
  }

  try {
    if (*sim_cmd) {
      cmd_simulate(config, out);
    } else if (*rec) {
      if (!a2 && profile.empty()) return report_error("usage", "reconstruct: give --a2 or --profile", kExitUsage);
      cmd_reconstruct(in, a2, a3, profile, blend, out, png, log);
    } else if (*search) {
      cmd_search(in, bands, frame, out);
    } else if (*st) {
      cmd_stitch(in, profile, blend, out);
    } else if (*fuse) {
      cmd_fuse(stack, profile, blend, out);
    } else if (*emit) {
      cmd_emit(in, k, profile, out_dir, c_lo, c_hi, allow_any_k, blend);
    } else if (*met) {
      cmd_metrics(gt, test, out, diff_png, scales);
    } else if (*prof) {
      popt.labels = split_labels(labels);
      cmd_profile(inputs, column, popt, out, csv);
    }
  } catch (const Error& e) {
    return report_error(to_string(e.kind()), e.what(), exit_code(e.kind()));
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kExitInternal);
  }
  return kExitOk;
}
