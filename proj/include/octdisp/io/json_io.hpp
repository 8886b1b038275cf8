#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "octdisp/core/error.hpp"
#include "octdisp/core/types.hpp"
#include "octdisp/metrics/analysis.hpp"
#include "octdisp/opt/search.hpp"
#include "octdisp/sim/simulator.hpp"

namespace octdisp::io {

using nlohmann::json;

/// Rejects keys of `obj` outside `allowed`; `where` prefixes the message.
inline void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  require(obj.is_object(), where + ": expected a JSON object", ErrorKind::schema);
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    require(ok.count(key) == 1, where + ": unknown key \"" + key + "\"", ErrorKind::schema);
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::schema, where + ": key \"" + key + "\" has the wrong type");
  }
}

// ---------------------------------------------------------------------------
// Simulator specs
// ---------------------------------------------------------------------------

inline json to_json(const sim::SourceSpec& s) {
  return {{"n_k", s.n_k},
          {"center_wavelength_um", s.center_wavelength_um},
          {"fwhm_bandwidth_um", s.fwhm_bandwidth_um},
          {"reference_power", s.reference_power}};
}

inline sim::SourceSpec source_from_json(const json& j) {
  check_keys(j, {"n_k", "center_wavelength_um", "fwhm_bandwidth_um", "reference_power"}, "source");
  sim::SourceSpec s;
  s.n_k = get_or<std::size_t>(j, "n_k", s.n_k, "source");
  s.center_wavelength_um = get_or(j, "center_wavelength_um", s.center_wavelength_um, "source");
  s.fwhm_bandwidth_um = get_or(j, "fwhm_bandwidth_um", s.fwhm_bandwidth_um, "source");
  s.reference_power = get_or(j, "reference_power", s.reference_power, "source");
  return s;
}

inline json to_json(const sim::LateralProfile& l) {
  return {{"kind", l.kind == sim::LateralKind::constant ? "constant" : "smooth_random"},
          {"seed", l.seed},
          {"modulation", l.modulation}};
}

inline sim::LateralProfile lateral_from_json(const json& j) {
  check_keys(j, {"kind", "seed", "modulation"}, "lateral");
  sim::LateralProfile l;
  const auto kind = get_or<std::string>(j, "kind", "constant", "lateral");
  require(kind == "constant" || kind == "smooth_random", "lateral: kind must be constant or smooth_random",
          ErrorKind::schema);
  l.kind = kind == "constant" ? sim::LateralKind::constant : sim::LateralKind::smooth_random;
  l.seed = get_or<std::uint64_t>(j, "seed", 0, "lateral");
  l.modulation = get_or(j, "modulation", l.modulation, "lateral");
  return l;
}

inline json to_json(const sim::Phantom& p) {
  json layers = json::array();
  for (const auto& l : p.layers)
    layers.push_back({{"depth_um", l.depth_um},
                      {"reflectivity", l.reflectivity},
                      {"a2_sample", l.a2_sample},
                      {"a3_sample", l.a3_sample},
                      {"group_index", l.group_index}});
  return {{"layers", layers}, {"lateral", to_json(p.lateral)}, {"n_a", p.n_a}};
}

inline sim::Phantom phantom_from_json(const json& j) {
  check_keys(j, {"layers", "lateral", "n_a"}, "phantom");
  sim::Phantom p;
  require(j.contains("layers") && j["layers"].is_array(), "phantom: layers array required", ErrorKind::schema);
  for (const auto& lj : j["layers"]) {
    check_keys(lj, {"depth_um", "reflectivity", "a2_sample", "a3_sample", "group_index"}, "phantom.layer");
    require(lj.contains("depth_um"), "phantom.layer: depth_um required", ErrorKind::schema);
    sim::PhantomLayer l;
    l.depth_um = get_or(lj, "depth_um", 0.0, "phantom.layer");
    l.reflectivity = get_or(lj, "reflectivity", 1.0, "phantom.layer");
    l.a2_sample = get_or(lj, "a2_sample", 0.0, "phantom.layer");
    l.a3_sample = get_or(lj, "a3_sample", 0.0, "phantom.layer");
    l.group_index = get_or(lj, "group_index", 1.0, "phantom.layer");
    p.layers.push_back(l);
  }
  if (j.contains("lateral")) p.lateral = lateral_from_json(j["lateral"]);
  p.n_a = get_or<std::size_t>(j, "n_a", p.n_a, "phantom");
  return p;
}

inline json to_json(const sim::NoiseSpec& n) { return {{"sigma", n.sigma}, {"seed", n.seed}}; }

inline sim::NoiseSpec noise_from_json(const json& j) {
  check_keys(j, {"sigma", "seed"}, "noise");
  return {get_or(j, "sigma", 0.0, "noise"), get_or<std::uint64_t>(j, "seed", 0, "noise")};
}

// ---------------------------------------------------------------------------
// Reconstruction and search configs
// ---------------------------------------------------------------------------

inline json to_json(const ReconstructionConfig& c) {
  json w;
  if (std::holds_alternative<NoWindow>(c.window)) w = {{"kind", "none"}};
  else if (std::holds_alternative<HannWindow>(c.window)) w = {{"kind", "hann"}};
  else w = {{"kind", "gaussian"}, {"sigma", std::get<GaussianWindow>(c.window).sigma}};
  return {{"window", w},
          {"background", c.background == BackgroundMode::column_mean ? "column_mean" : "reference"},
          {"log_floor_db", c.log_floor_db},
          {"interpolation", c.interpolation == Interpolation::cubic ? "cubic" : "linear"}};
}

inline ReconstructionConfig reconstruction_from_json(const json& j) {
  check_keys(j, {"window", "background", "log_floor_db", "interpolation"}, "reconstruction");
  ReconstructionConfig c;
  if (j.contains("window")) {
    const auto& w = j["window"];
    check_keys(w, {"kind", "sigma"}, "reconstruction.window");
    const auto kind = get_or<std::string>(w, "kind", "none", "reconstruction.window");
    if (kind == "none") c.window = NoWindow{};
    else if (kind == "hann") c.window = HannWindow{};
    else if (kind == "gaussian") c.window = GaussianWindow{get_or(w, "sigma", 0.5, "reconstruction.window")};
    else fail(ErrorKind::schema, "reconstruction.window: kind must be none, hann or gaussian");
  }
  const auto bg = get_or<std::string>(j, "background", "column_mean", "reconstruction");
  require(bg == "column_mean" || bg == "reference", "reconstruction: background must be column_mean or reference",
          ErrorKind::schema);
  c.background = bg == "column_mean" ? BackgroundMode::column_mean : BackgroundMode::reference;
  c.log_floor_db = get_or(j, "log_floor_db", c.log_floor_db, "reconstruction");
  const auto interp = get_or<std::string>(j, "interpolation", "cubic", "reconstruction");
  require(interp == "cubic" || interp == "linear", "reconstruction: interpolation must be cubic or linear",
          ErrorKind::schema);
  c.interpolation = interp == "cubic" ? Interpolation::cubic : Interpolation::linear;
  require(c.log_floor_db < 0, "reconstruction: log_floor_db must be negative", ErrorKind::schema);
  return c;
}

inline json to_json(const opt::SearchConfig& s) {
  return {{"a2_range", {s.a2_lo, s.a2_hi}},
          {"grid_points", s.grid_points},
          {"golden_iterations", s.golden_iterations},
          {"tolerance", s.tolerance}};
}

inline opt::SearchConfig search_from_json(const json& j) {
  check_keys(j, {"a2_range", "grid_points", "golden_iterations", "tolerance", "threshold_fraction", "metric"}, "search");
  opt::SearchConfig s;
  if (j.contains("a2_range")) {
    const auto& r = j["a2_range"];
    require(r.is_array() && r.size() == 2, "search: a2_range must be [lo, hi]", ErrorKind::schema);
    s.a2_lo = r[0].get<double>();
    s.a2_hi = r[1].get<double>();
  }
  s.grid_points = get_or<std::size_t>(j, "grid_points", s.grid_points, "search");
  s.golden_iterations = get_or<std::size_t>(j, "golden_iterations", s.golden_iterations, "search");
  s.tolerance = get_or(j, "tolerance", s.tolerance, "search");
  return s;
}

inline opt::SharpnessConfig sharpness_from_json(const json& j) {
  opt::SharpnessConfig s;
  s.threshold_fraction = get_or(j, "threshold_fraction", s.threshold_fraction, "search");
  const auto metric = get_or<std::string>(j, "metric", "threshold_count", "search");
  require(metric == "threshold_count" || metric == "entropy", "search: metric must be threshold_count or entropy",
          ErrorKind::schema);
  s.metric = metric == "entropy" ? opt::SharpnessMetric::entropy : opt::SharpnessMetric::threshold_count;
  return s;
}

// ---------------------------------------------------------------------------
// Dispersion profile
// ---------------------------------------------------------------------------

inline json to_json(const opt::DispersionProfile& p) {
  json bands = json::array();
  for (const auto& b : p.bands)
    bands.push_back({{"row_begin", b.row_begin}, {"row_end", b.row_end}, {"a2", b.coeffs.a2}, {"a3", b.coeffs.a3}});
  return {{"bands", bands}};
}

inline opt::DispersionProfile profile_from_json(const json& j) {
  check_keys(j, {"bands"}, "profile");
  require(j.contains("bands") && j["bands"].is_array(), "profile: bands array required", ErrorKind::schema);
  opt::DispersionProfile p;
  for (const auto& bj : j["bands"]) {
    check_keys(bj, {"row_begin", "row_end", "a2", "a3"}, "profile.band");
    require(bj.contains("row_begin") && bj.contains("row_end") && bj.contains("a2"),
            "profile.band: row_begin, row_end and a2 required", ErrorKind::schema);
    p.bands.push_back({bj["row_begin"].get<std::size_t>(), bj["row_end"].get<std::size_t>(),
                       {bj["a2"].get<double>(), get_or(bj, "a3", 0.0, "profile.band")}});
  }
  return p;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const metrics::ProfileReport& r) {
  json peaks = json::array();
  for (const auto& p : r.peaks) {
    json pj = {{"index", p.index}, {"location_px", p.location}, {"height", p.height},
               {"prominence", p.prominence}, {"fwhm_px", p.fwhm}};
    if (!p.label.empty()) pj["label"] = p.label;
    peaks.push_back(pj);
  }
  return {{"column", r.column}, {"n_cols", r.n_cols}, {"n_frames", r.n_frames}, {"profile", r.profile},
          {"peaks", peaks}};
}

}  // namespace octdisp::io
