#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "octdisp/io/json_io.hpp"
#include "octdisp/metrics/quality.hpp"

namespace octdisp::metrics {

struct MetricReport {
  std::string frame_id;
  double psnr_db = 0.0;  // +inf when identical
  bool identical = false;
  double ms_ssim = 0.0;
  std::vector<ScaleResult> scales;
};

inline MetricReport evaluate(const RealMatrix& ground_truth, const RealMatrix& test, const MsSsimConfig& cfg = {},
                             std::string frame_id = {}) {
  MetricReport r;
  r.frame_id = std::move(frame_id);
  r.psnr_db = psnr(ground_truth, test);
  r.identical = std::isinf(r.psnr_db);
  const auto ms = ms_ssim_detailed(ground_truth, test, cfg);
  r.ms_ssim = ms.value;
  r.scales = ms.scales;
  return r;
}

inline nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json scales = nlohmann::json::array();
  for (const auto& s : r.scales)
    scales.push_back({{"luminance", s.luminance},
                      {"contrast", s.contrast},
                      {"structure", s.structure},
                      {"contrast_structure", s.contrast_structure},
                      {"ssim", s.ssim}});
  return {{"frame_id", r.frame_id}, {"psnr_db", io::number_or_null(r.psnr_db)}, {"identical", r.identical},
          {"ms_ssim", r.ms_ssim}, {"scales", scales}};
}

}  // namespace octdisp::metrics
