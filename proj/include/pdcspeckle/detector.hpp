#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "config.hpp"
#include "error.hpp"
#include "image.hpp"
#include "phasematch.hpp"
#include "random.hpp"

namespace pdcspeckle {

inline constexpr const char* kGeneratorVersion = "pdcspeckle-1.0";

struct FrameMetadata {
  /// False when a frame was loaded without its sidecar.
  bool known = true;
  std::uint64_t seed = 0;
  double pulse_power = 0.0;
  double gain_peak = 0.0;
  std::uint32_t modes = 0;
  double waist = 0.0;
  std::string exposure = "single-shot";
  bool saturated = false;
  std::string generator = kGeneratorVersion;

  friend bool operator==(const FrameMetadata&, const FrameMetadata&) = default;
};

/// Detected CCD frame in photoelectron counts (1 e- per count).
struct Frame {
  Image<std::uint16_t> counts;
  FrameMetadata meta;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct PixelPosition {
  double x = 0.0;
  double y = 0.0;
  bool inside = true;
};

/// f-f mapping x = (lambda f / 2 pi) q, in pixels relative to `center`.
/// Out-of-array positions are returned as-is with `inside` cleared.
inline PixelPosition map_q_to_pixel(Vec2 q, const DetectorConfig& det, double wavelength,
                                    Vec2 center) {
  PixelPosition p;
  p.x = center.x + far_field_position(q.x, wavelength, det.focal_length) / det.pixel_pitch;
  p.y = center.y + far_field_position(q.y, wavelength, det.focal_length) / det.pixel_pitch;
  p.inside = p.x >= -0.5 && p.y >= -0.5 && p.x < static_cast<double>(det.width) - 0.5 &&
             p.y < static_cast<double>(det.height) - 0.5;
  return p;
}

/// Mapping about the geometric center of the configured array.
inline PixelPosition map_q_to_pixel(Vec2 q, const DetectorConfig& det, double wavelength) {
  return map_q_to_pixel(q, det, wavelength,
                        Vec2{(static_cast<double>(det.width) - 1.0) / 2.0,
                             (static_cast<double>(det.height) - 1.0) / 2.0});
}

/// eta_coll ~ A_pix / A_coh, capped at one.
inline double collection_efficiency(double pixel_area, double coherence_area) {
  if (!(pixel_area > 0.0) || !(coherence_area > 0.0)) {
    throw AnalysisError(AnalysisFailure::InvalidInput, "collection efficiency needs positive areas");
  }
  return std::min(1.0, pixel_area / coherence_area);
}

/// CCD forward model. The per-pixel efficiency map is drawn once at construction from
/// `pattern_seed` and shared by every frame this instance detects.
class Detector {
 public:
  Detector(const DetectorConfig& config, std::size_t width, std::size_t height)
      : config_(config), efficiency_(width, height) {
    validate(config_);
    if (width > config_.width || height > config_.height) {
      throw ConfigError("frame does not fit the detector array", "detector.width");
    }
    Engine rng(derive_seed(config_.pattern_seed, 0xe7a));
    std::normal_distribution<double> eps(0.0, config_.efficiency_fluct);
    for (auto& e : efficiency_.pixels()) {
      const double d = config_.efficiency_fluct > 0.0 ? eps(rng) : 0.0;
      e = std::clamp(config_.quantum_efficiency * (1.0 + d), 0.0, 1.0);
    }
  }

  const DetectorConfig& config() const noexcept { return config_; }
  const Image<double>& efficiency_map() const noexcept { return efficiency_; }

  /// Counts before rounding and clamping: Poisson(eta_p I_p) + N(0, read_noise).
  Image<double> detect_signed(const Image<double>& intensity, std::uint64_t seed) const {
    check_shape(intensity);
    Engine rng(seed);
    std::normal_distribution<double> read(0.0, 1.0);
    Image<double> out(intensity.width(), intensity.height());
    const auto in = intensity.pixels();
    const auto eta = efficiency_.pixels();
    auto dst = out.pixels();
    for (std::size_t k = 0; k < in.size(); ++k) {
      if (!(in[k] >= 0.0) || !std::isfinite(in[k])) {
        throw AnalysisError(AnalysisFailure::InvalidInput,
                            "detector input intensity must be finite and non-negative");
      }
      const double mu = eta[k] * in[k];
      double v = mu;
      if (config_.shot_noise && mu > 0.0) {
        std::poisson_distribution<std::int64_t> photo(mu);
        v = static_cast<double>(photo(rng));
      }
      if (config_.read_noise > 0.0) v += config_.read_noise * read(rng);
      dst[k] = v;
    }
    return out;
  }

  /// Rounded to the nearest count and clamped to [0, saturation].
  Frame apply_detection(const Image<double>& intensity, std::uint64_t seed,
                        FrameMetadata meta = {}) const {
    const Image<double> signed_counts = detect_signed(intensity, seed);
    Frame f;
    f.counts = Image<std::uint16_t>(intensity.width(), intensity.height());
    const double sat = static_cast<double>(config_.saturation);
    bool saturated = false;
    auto dst = f.counts.pixels();
    const auto src = signed_counts.pixels();
    for (std::size_t k = 0; k < src.size(); ++k) {
      const double c = std::clamp(std::nearbyint(src[k]), 0.0, sat);
      saturated = saturated || c >= sat;
      dst[k] = static_cast<std::uint16_t>(c);
    }
    f.meta = std::move(meta);
    f.meta.saturated = saturated;
    return f;
  }

 private:
  void check_shape(const Image<double>& intensity) const {
    if (intensity.width() != efficiency_.width() || intensity.height() != efficiency_.height()) {
      throw ConfigError("intensity map shape differs from the detector instance");
    }
  }

  DetectorConfig config_;
  Image<double> efficiency_;
};

}  // namespace pdcspeckle
