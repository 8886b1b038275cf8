#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <vector>

#include <png.h>

#include "octdisp/core/error.hpp"
#include "octdisp/core/types.hpp"
#include "octdisp/metrics/analysis.hpp"

namespace octdisp::io {

namespace detail {

/// 8-bit PNG without time or text chunks, so output bytes depend only on pixels.
inline void write_png(const std::filesystem::path& path, std::size_t rows, std::size_t cols, int color_type,
                      const std::vector<std::uint8_t>& bytes) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  require(fp != nullptr, "cannot open " + path.string() + " for writing", ErrorKind::io);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, "png: cannot create writer", ErrorKind::io);
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::io, "png: write failed for " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = cols * (color_type == PNG_COLOR_TYPE_RGB ? 3 : 1);
  for (std::size_t r = 0; r < rows; ++r)
    png_write_row(png, const_cast<png_bytep>(bytes.data() + r * stride));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace detail

/// Grayscale export of a log-scaled image: floor_db maps to 0, 0 dB to 255.
inline void write_log_png(const std::filesystem::path& path, const BScan& log_image, double floor_db) {
  require(log_image.scale == ImageScale::log_db, "png: expected a log-scaled image");
  std::vector<std::uint8_t> bytes(log_image.pixels.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const double t = std::clamp((log_image.pixels.data()[i] - floor_db) / -floor_db, 0.0, 1.0);
    bytes[i] = static_cast<std::uint8_t>(std::lround(255.0 * t));
  }
  detail::write_png(path, log_image.n_z(), log_image.n_a(), PNG_COLOR_TYPE_GRAY, bytes);
}

inline void write_color_png(const std::filesystem::path& path, const metrics::ColorImage& img) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(img.pixels.size() * 3);
  for (const auto& p : img.pixels) {
    bytes.push_back(p.r);
    bytes.push_back(p.g);
    bytes.push_back(p.b);
  }
  detail::write_png(path, img.rows, img.cols, PNG_COLOR_TYPE_RGB, bytes);
}

}  // namespace octdisp::io
