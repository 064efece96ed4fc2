#pragma once

// Binary netpbm (P5 graymap, P6 pixmap) codec. Samples are scaled into [0, 1]
// on load and quantized with round-half-up on save.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "chanvese/image.hpp"

namespace chanvese {

using Bytes = std::vector<std::uint8_t>;

class NetpbmError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, BadHeader, ZeroDimension, BadMaxval, Truncated };

  NetpbmError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct NetpbmHeader {
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::uint32_t maxval = 0;
  std::size_t payload_offset = 0;
};

inline bool is_space(std::uint8_t ch) {
  return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\v' || ch == '\f';
}

// Skips whitespace and '#' comments (which run to end of line).
inline void skip_separators(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (is_space(bytes[pos])) {
      ++pos;
    } else if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
}

inline std::uint64_t read_header_uint(std::span<const std::uint8_t> bytes, std::size_t& pos,
                                      const char* field) {
  skip_separators(bytes, pos);
  if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9') {
    throw NetpbmError(NetpbmError::Kind::BadHeader,
                      std::string("netpbm: expected unsigned integer for ") + field);
  }
  std::uint64_t value = 0;
  while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 0xFFFFFFFFull) {
      throw NetpbmError(NetpbmError::Kind::BadHeader, std::string("netpbm: ") + field + " overflows");
    }
    ++pos;
  }
  return value;
}

inline NetpbmHeader parse_header(std::span<const std::uint8_t> bytes, char kind_digit) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != static_cast<std::uint8_t>(kind_digit)) {
    std::string got = bytes.size() >= 2 ? std::string{static_cast<char>(bytes[0]), static_cast<char>(bytes[1])}
                                        : std::string("<short>");
    throw NetpbmError(NetpbmError::Kind::BadMagic,
                      std::string("netpbm: expected magic P") + kind_digit + ", got '" + got + "'");
  }
  std::size_t pos = 2;
  NetpbmHeader h;
  h.cols = read_header_uint(bytes, pos, "width");
  h.rows = read_header_uint(bytes, pos, "height");
  const auto maxval = read_header_uint(bytes, pos, "maxval");
  if (h.cols == 0 || h.rows == 0) {
    throw NetpbmError(NetpbmError::Kind::ZeroDimension, "netpbm: zero image dimension");
  }
  if (maxval == 0 || maxval > 65535) {
    throw NetpbmError(NetpbmError::Kind::BadMaxval,
                      "netpbm: maxval " + std::to_string(maxval) + " outside [1, 65535]");
  }
  h.maxval = static_cast<std::uint32_t>(maxval);
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= bytes.size() || !is_space(bytes[pos])) {
    throw NetpbmError(NetpbmError::Kind::Truncated, "netpbm: missing raster after header");
  }
  h.payload_offset = pos + 1;
  return h;
}

inline std::vector<double> read_samples(std::span<const std::uint8_t> bytes, const NetpbmHeader& h,
                                        std::size_t count) {
  const std::size_t width = h.maxval > 255 ? 2 : 1;
  const std::size_t need = count * width;
  if (bytes.size() - h.payload_offset < need) {
    throw NetpbmError(NetpbmError::Kind::Truncated,
                      "netpbm: raster truncated (" + std::to_string(bytes.size() - h.payload_offset) +
                          " of " + std::to_string(need) + " bytes)");
  }
  std::vector<double> out(count);
  const double scale = 1.0 / static_cast<double>(h.maxval);
  const std::uint8_t* p = bytes.data() + h.payload_offset;
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t v = width == 2 ? (std::uint32_t{p[2 * i]} << 8) | p[2 * i + 1] : p[i];
    out[i] = static_cast<double>(v) * scale;
  }
  return out;
}

inline std::string make_header(char kind_digit, std::size_t cols, std::size_t rows, std::uint32_t maxval) {
  return std::string("P") + kind_digit + "\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n" +
         std::to_string(maxval) + "\n";
}

inline void check_maxval(std::uint32_t maxval) {
  if (maxval == 0 || maxval > 65535) {
    throw NetpbmError(NetpbmError::Kind::BadMaxval,
                      "netpbm: maxval " + std::to_string(maxval) + " outside [1, 65535]");
  }
}

inline void append_sample(Bytes& out, double v, std::uint32_t maxval) {
  const auto q = static_cast<std::uint32_t>(std::floor(std::clamp(v, 0.0, 1.0) * maxval + 0.5));
  if (maxval > 255) {
    out.push_back(static_cast<std::uint8_t>(q >> 8));
  }
  out.push_back(static_cast<std::uint8_t>(q & 0xFF));
}

}  // namespace detail

inline GrayImage load_pgm(std::span<const std::uint8_t> bytes) {
  const auto h = detail::parse_header(bytes, '5');
  return GrayImage(h.rows, h.cols, detail::read_samples(bytes, h, h.rows * h.cols));
}

inline Bytes save_pgm(const GrayImage& img, std::uint32_t maxval = 255) {
  detail::check_maxval(maxval);
  const std::string header = detail::make_header('5', img.cols(), img.rows(), maxval);
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + img.size() * (maxval > 255 ? 2 : 1));
  for (double v : img.values()) detail::append_sample(out, v, maxval);
  return out;
}

inline RgbImage load_ppm(std::span<const std::uint8_t> bytes) {
  const auto h = detail::parse_header(bytes, '6');
  const std::size_t n = h.rows * h.cols;
  const auto interleaved = detail::read_samples(bytes, h, 3 * n);
  std::array<std::vector<double>, 3> planes;
  for (auto& p : planes) p.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) planes[c][i] = interleaved[3 * i + c];
  }
  return RgbImage(GrayImage(h.rows, h.cols, std::move(planes[0])),
                  GrayImage(h.rows, h.cols, std::move(planes[1])),
                  GrayImage(h.rows, h.cols, std::move(planes[2])));
}

inline Bytes save_ppm(const RgbImage& img, std::uint32_t maxval = 255) {
  detail::check_maxval(maxval);
  const std::string header = detail::make_header('6', img.cols(), img.rows(), maxval);
  Bytes out(header.begin(), header.end());
  const std::size_t n = img.rows() * img.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& ch : img.channels()) detail::append_sample(out, ch[i], maxval);
  }
  return out;
}

/// Which netpbm flavour a byte stream claims to be, from its magic number.
enum class NetpbmKind { Unknown, Pgm, Ppm };

inline NetpbmKind sniff_netpbm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 2 && bytes[0] == 'P') {
    if (bytes[1] == '5') return NetpbmKind::Pgm;
    if (bytes[1] == '6') return NetpbmKind::Ppm;
  }
  return NetpbmKind::Unknown;
}

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace chanvese
