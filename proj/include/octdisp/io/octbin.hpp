#pragma once

// OctBin: self-describing float32 array file.
//
//   bytes 0..3   magic "OCTB"
//   bytes 4..7   header length N, uint32 little-endian
//   bytes 8..    N bytes of UTF-8 JSON header
//   then         planes·rows·cols float32 little-endian, row-major, plane-major
//
// Required header keys: "dims" [planes, rows, cols] and "dtype" "f32le".
// Optional: "scale", "axial_pixel_um", "coefficients", and free-form extras.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "octdisp/core/error.hpp"
#include "octdisp/core/types.hpp"

namespace octdisp::io {

using nlohmann::json;

inline constexpr char kOctBinMagic[4] = {'O', 'C', 'T', 'B'};

struct OctBinFile {
  json header = json::object();
  std::size_t planes = 0, rows = 0, cols = 0;
  std::vector<float> payload;

  std::size_t plane_size() const noexcept { return rows * cols; }

  RealMatrix plane(std::size_t p) const {
    require(p < planes, "octbin: plane index out of range");
    std::vector<double> v(payload.begin() + static_cast<std::ptrdiff_t>(p * plane_size()),
                          payload.begin() + static_cast<std::ptrdiff_t>((p + 1) * plane_size()));
    return RealMatrix(rows, cols, std::move(v));
  }

  void append_plane(const RealMatrix& m) {
    if (planes == 0) {
      rows = m.rows();
      cols = m.cols();
    }
    require(m.rows() == rows && m.cols() == cols, "octbin: plane dimensions differ");
    for (double v : m.data()) payload.push_back(static_cast<float>(v));
    ++planes;
  }
};

namespace detail {

inline void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

/// Serialized bytes. The header is emitted with sorted keys, so equal files
/// produce equal bytes.
inline std::string encode_octbin(const OctBinFile& f) {
  require(f.payload.size() == f.planes * f.rows * f.cols, "octbin: payload size does not match dims");
  json header = f.header;
  header["dims"] = {f.planes, f.rows, f.cols};
  header["dtype"] = "f32le";
  const std::string text = header.dump();
  require(text.size() <= 0xFFFFFFFFull, "octbin: header too large");
  std::string out(kOctBinMagic, 4);
  detail::put_u32le(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  out.reserve(out.size() + f.payload.size() * 4);
  for (float v : f.payload) detail::put_u32le(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

inline OctBinFile decode_octbin(const std::string& bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  require(bytes.size() >= 8, "octbin: file too short", ErrorKind::format);
  require(std::memcmp(bytes.data(), kOctBinMagic, 4) == 0, "octbin: bad magic", ErrorKind::format);
  const std::uint32_t hlen = detail::get_u32le(p + 4);
  require(bytes.size() >= 8ull + hlen, "octbin: truncated header", ErrorKind::format);
  OctBinFile f;
  try {
    f.header = json::parse(bytes.begin() + 8, bytes.begin() + 8 + hlen);
  } catch (const json::exception& e) {
    fail(ErrorKind::format, std::string("octbin: header is not valid JSON: ") + e.what());
  }
  require(f.header.is_object(), "octbin: header must be a JSON object", ErrorKind::format);
  require(f.header.contains("dtype") && f.header["dtype"] == "f32le", "octbin: dtype must be f32le", ErrorKind::format);
  require(f.header.contains("dims") && f.header["dims"].is_array() && f.header["dims"].size() == 3,
          "octbin: dims must be [planes, rows, cols]", ErrorKind::format);
  for (const auto& d : f.header["dims"])
    require(d.is_number_unsigned() || (d.is_number_integer() && d.get<long long>() >= 0),
            "octbin: dims must be non-negative integers", ErrorKind::format);
  f.planes = f.header["dims"][0].get<std::size_t>();
  f.rows = f.header["dims"][1].get<std::size_t>();
  f.cols = f.header["dims"][2].get<std::size_t>();
  const std::size_t count = f.planes * f.rows * f.cols;
  require(bytes.size() - 8 - hlen == count * 4, "octbin: payload length does not match dims", ErrorKind::format);
  f.payload.resize(count);
  const unsigned char* data = p + 8 + hlen;
  for (std::size_t i = 0; i < count; ++i) f.payload[i] = std::bit_cast<float>(detail::get_u32le(data + 4 * i));
  return f;
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), "cannot open " + path.string() + " for writing", ErrorKind::io);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), "write failed: " + path.string(), ErrorKind::io);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path.string(), ErrorKind::io);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_octbin(const std::filesystem::path& path, const OctBinFile& f) { write_file(path, encode_octbin(f)); }
inline OctBinFile read_octbin(const std::filesystem::path& path) { return decode_octbin(read_file(path)); }

// ---------------------------------------------------------------------------
// Typed helpers
// ---------------------------------------------------------------------------

inline const char* scale_tag(ImageScale s) { return s == ImageScale::linear ? "linear" : "log_db"; }
inline const char* domain_tag(SpectralDomain d) {
  return d == SpectralDomain::wavelength ? "spectrum_wavelength" : "spectrum_k";
}

inline json coefficients_json(const DispersionCoefficients& c) { return json{{"a2", c.a2}, {"a3", c.a3}}; }

inline DispersionCoefficients coefficients_from_json(const json& j) {
  require(j.is_object() && j.contains("a2"), "coefficients: expected object with a2", ErrorKind::format);
  return {j.at("a2").get<double>(), j.value("a3", 0.0)};
}

inline OctBinFile bscans_to_octbin(std::span<const BScan> images, std::span<const DispersionCoefficients> coeffs = {}) {
  require(!images.empty(), "octbin: no images");
  OctBinFile f;
  f.header["scale"] = scale_tag(images.front().scale);
  f.header["axial_pixel_um"] = images.front().axial_pixel_um;
  if (!coeffs.empty()) {
    json arr = json::array();
    for (const auto& c : coeffs) arr.push_back(coefficients_json(c));
    f.header["coefficients"] = arr;
  }
  for (const auto& b : images) {
    require(b.scale == images.front().scale, "octbin: mixed image scales");
    f.append_plane(b.pixels);
  }
  return f;
}

inline std::vector<BScan> octbin_to_bscans(const OctBinFile& f) {
  const std::string scale = f.header.value("scale", "linear");
  require(scale == "linear" || scale == "log_db", "octbin: file does not hold images (scale=" + scale + ")",
          ErrorKind::format);
  const double pixel = f.header.value("axial_pixel_um", 1.5);
  std::vector<BScan> out;
  for (std::size_t p = 0; p < f.planes; ++p)
    out.push_back(BScan{f.plane(p), scale == "linear" ? ImageScale::linear : ImageScale::log_db, pixel});
  return out;
}

inline OctBinFile spectrograms_to_octbin(std::span<const Spectrogram> frames) {
  require(!frames.empty(), "octbin: no spectrograms");
  OctBinFile f;
  f.header["scale"] = domain_tag(frames.front().domain);
  for (const auto& s : frames) {
    require(s.domain == frames.front().domain, "octbin: mixed spectral domains");
    f.append_plane(s.data);
  }
  return f;
}

inline std::vector<Spectrogram> octbin_to_spectrograms(const OctBinFile& f) {
  const std::string scale = f.header.value("scale", "");
  require(scale == "spectrum_wavelength" || scale == "spectrum_k",
          "octbin: file does not hold spectrograms (scale=" + scale + ")", ErrorKind::format);
  std::vector<Spectrogram> out;
  for (std::size_t p = 0; p < f.planes; ++p)
    out.push_back(Spectrogram{f.plane(p), scale == "spectrum_k" ? SpectralDomain::k_linear : SpectralDomain::wavelength});
  return out;
}

}  // namespace octdisp::io
