#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "../detector.hpp"
#include "../error.hpp"
#include "../image.hpp"
#include "text.hpp"

namespace pdcspeckle {

/// Binary PGM header. Only 16-bit grayscale ("P5", maxval 65535) is written or accepted.
struct FrameFileHeader {
  std::string magic = "P5";
  int version = 1;
  std::size_t width = 0;
  std::size_t height = 0;
  int bit_depth = 16;

  friend bool operator==(const FrameFileHeader&, const FrameFileHeader&) = default;
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& frame_path) {
  std::filesystem::path p = frame_path;
  p += ".meta";
  return p;
}

namespace detail {

/// Next whitespace-delimited header token, skipping `#` comments.
inline std::string pgm_token(std::istream& in, const std::string& path) {
  std::string tok;
  int ch = 0;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw IoError("corrupt frame file " + path + ": truncated header");
  return tok;
}

inline std::string format_metadata(const FrameMetadata& m) {
  std::string s;
  s += "seed = " + std::to_string(m.seed) + "\n";
  s += "pulse_power_W = " + text::format_exact(m.pulse_power) + "\n";
  s += "gain_peak = " + text::format_exact(m.gain_peak) + "\n";
  s += "M = " + std::to_string(m.modes) + "\n";
  s += "waist_m = " + text::format_exact(m.waist) + "\n";
  s += "exposure = " + m.exposure + "\n";
  s += "saturated = " + std::string(m.saturated ? "true" : "false") + "\n";
  s += "generator = " + m.generator + "\n";
  return s;
}

inline FrameMetadata parse_metadata(std::istream& in, const std::string& path) {
  FrameMetadata m;
  m.generator.clear();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = text::trim(line);
    if (v.empty() || v.front() == '#') continue;
    const auto eq = v.find('=');
    const std::string where = path + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw IoError("corrupt sidecar " + where + ": expected 'key = value'");
    const std::string_view key = text::trim(v.substr(0, eq));
    const std::string_view value = text::trim(v.substr(eq + 1));
    bool ok = true;
    if (key == "seed") {
      ok = text::parse_integer(value, m.seed);
    } else if (key == "pulse_power_W") {
      ok = text::parse_double(value, m.pulse_power);
    } else if (key == "gain_peak") {
      ok = text::parse_double(value, m.gain_peak);
    } else if (key == "M") {
      ok = text::parse_integer(value, m.modes);
    } else if (key == "waist_m") {
      ok = text::parse_double(value, m.waist);
    } else if (key == "exposure") {
      m.exposure = std::string(value);
    } else if (key == "saturated") {
      ok = value == "true" || value == "false";
      m.saturated = value == "true";
    } else if (key == "generator") {
      m.generator = std::string(value);
    }
    // Unrecognized keys are tolerated for forward compatibility.
    if (!ok) throw IoError("corrupt sidecar " + where + ": bad value for " + std::string(key));
  }
  return m;
}

}  // namespace detail

/// Writes the counts as big-endian 16-bit P5 and the metadata to `<path>.meta`.
inline void save_frame(const Frame& frame, const std::filesystem::path& path) {
  const auto& img = frame.counts;
  if (img.width() == 0 || img.height() == 0) throw IoError("refusing to save an empty frame");
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write frame file " + path.string());
    out << "P5\n" << img.width() << ' ' << img.height() << "\n65535\n";
    std::vector<unsigned char> buf(img.pixels().size() * 2);
    std::size_t k = 0;
    for (const std::uint16_t v : img.pixels()) {
      buf[k++] = static_cast<unsigned char>(v >> 8);
      buf[k++] = static_cast<unsigned char>(v & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed for " + path.string());
  }
  std::ofstream meta(sidecar_path(path), std::ios::binary);
  if (!meta) throw IoError("cannot write sidecar " + sidecar_path(path).string());
  meta << detail::format_metadata(frame.meta);
  if (!meta) throw IoError("write failed for " + sidecar_path(path).string());
}

/// Reads the PGM header only.
inline FrameFileHeader read_frame_header(std::istream& in, const std::string& path) {
  FrameFileHeader h;
  h.magic = detail::pgm_token(in, path);
  if (h.magic != "P5") throw IoError("corrupt frame file " + path + ": magic is not P5");
  const std::string w = detail::pgm_token(in, path);
  const std::string ht = detail::pgm_token(in, path);
  const std::string maxval = detail::pgm_token(in, path);
  if (!text::parse_integer(w, h.width) || !text::parse_integer(ht, h.height) || h.width == 0 ||
      h.height == 0) {
    throw IoError("corrupt frame file " + path + ": bad dimensions");
  }
  if (maxval != "65535") {
    throw IoError("unsupported frame file " + path + ": maxval " + maxval + " (need 65535)");
  }
  return h;
}

/// Loads a frame. A missing sidecar leaves `meta.known` false with the saturation flag
/// recomputed from the counts.
inline Frame load_frame(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open frame file " + path.string());
  const FrameFileHeader h = read_frame_header(in, path.string());
  const std::size_t n = h.width * h.height;
  std::vector<unsigned char> buf(n * 2);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
    throw IoError("corrupt frame file " + path.string() + ": truncated payload (" +
                  std::to_string(in.gcount()) + " of " + std::to_string(buf.size()) + " bytes)");
  }
  if (in.peek() != EOF) throw IoError("corrupt frame file " + path.string() + ": trailing bytes after payload");

  Frame f;
  f.counts = Image<std::uint16_t>(h.width, h.height);
  auto px = f.counts.pixels();
  for (std::size_t k = 0; k < n; ++k) {
    px[k] = static_cast<std::uint16_t>((buf[2 * k] << 8) | buf[2 * k + 1]);
  }

  const auto meta_path = sidecar_path(path);
  std::ifstream meta(meta_path, std::ios::binary);
  if (meta) {
    f.meta = detail::parse_metadata(meta, meta_path.string());
  } else {
    f.meta = FrameMetadata{};
    f.meta.known = false;
    f.meta.generator = "unknown";
    f.meta.saturated = std::any_of(px.begin(), px.end(), [](std::uint16_t v) { return v == 65535; });
  }
  return f;
}

}  // namespace pdcspeckle
