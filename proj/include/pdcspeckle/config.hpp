#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "error.hpp"

namespace pdcspeckle {

/// Sentinel for an ideal single-frequency pump (no thermal intensity fluctuation).
inline constexpr std::uint64_t kUnboundedLaserModes = std::numeric_limits<std::uint64_t>::max();

// All quantities are SI unless the name says otherwise.

struct PumpConfig {
  double wavelength = 355e-9;
  double waist = 1.0e-3;
  /// Mean pulse power (W). Enters the gain law through A_pump = sqrt(P / (pi w^2 / 2)).
  double mean_pulse_power = 1.0;
  double pulse_duration = 5e-9;
  /// Relative std of the slow shot-to-shot power drift.
  double power_fluct_frac = 0.20;
  std::uint64_t laser_mode_count = 10;

  friend bool operator==(const PumpConfig&, const PumpConfig&) = default;
};

enum class Regime { NoncollinearLinear, CollinearQuadratic };

struct CrystalConfig {
  double length = 1e-2;
  double degenerate_wavelength = 710e-9;
  double emission_angle = 0.05;
  /// Gain coefficient sigma with g = sigma * A_pump, in m / sqrt(W).
  /// 2.53 (mm^2/W)^(1/2) == 2.53e-3 m W^(-1/2).
  double gain_coefficient = 2.53e-3;
  Regime regime = Regime::NoncollinearLinear;
  /// Dimensionless prefactor of both sinc-bandwidth formulas.
  double sinc_prefactor = 2.78;
  /// Coefficient of the frequency-detuning term of the phase mismatch (s/m).
  double detuning_coefficient = 0.0;

  friend bool operator==(const CrystalConfig&, const CrystalConfig&) = default;
};

struct DetectorConfig {
  double pixel_pitch = 20e-6;
  std::size_t width = 1340;
  std::size_t height = 400;
  double quantum_efficiency = 0.80;
  /// Relative std of the per-pixel efficiency (fixed pattern).
  double efficiency_fluct = 0.03;
  /// Read noise, electrons rms per pixel.
  double read_noise = 4.0;
  double focal_length = 0.10;
  std::uint32_t saturation = 65535;
  /// Poisson photocounting. Off only for noiseless debugging.
  bool shot_noise = true;
  std::uint64_t pattern_seed = 1;

  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

enum class SamplingModel {
  /// Classical twin fields with normally-ordered moments (thermal photon statistics).
  Glauber,
  /// Symmetric-ordering vacuum sampling with half-photon subtraction.
  Wigner,
};

struct SynthesisConfig {
  /// Transform size per half-plane; must be a power of two.
  std::size_t grid = 256;
  SamplingModel sampling = SamplingModel::Glauber;
  /// Multiply far fields by the phase-matching envelope |sinc(dk l / 2)|.
  bool apodize = false;
  /// Off: idler drawn independently of the signal (null-test debug mode).
  bool twin = true;
  std::uint32_t modes_min = 90;
  std::uint32_t modes_max = 300;
  /// When set, the mean pulse power is derived so the mean peak gain equals this.
  std::optional<double> target_gain;

  friend bool operator==(const SynthesisConfig&, const SynthesisConfig&) = default;
};

struct Region {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t width = 0;
  std::size_t height = 0;

  std::size_t area() const noexcept { return width * height; }
  friend bool operator==(const Region&, const Region&) = default;
};

enum class RadiusConvention { Hwhm, EFold };
enum class AnalysisSource { Counts, Intensity };

struct AnalysisConfig {
  /// Unset: the signal half-plane minus a margin of `max_disp` pixels.
  std::optional<Region> region;
  int max_disp = 8;
  /// Pixel decimation for the single-frame moment statistics.
  std::size_t stride = 1;
  RadiusConvention radius = RadiusConvention::Hwhm;
  /// Counts: analyze detected frames. Intensity: analyze the field before detection.
  AnalysisSource source = AnalysisSource::Counts;

  friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

struct ExperimentConfig {
  PumpConfig pump;
  CrystalConfig crystal;
  DetectorConfig detector;
  SynthesisConfig synthesis;
  AnalysisConfig analysis;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {
inline void require(bool ok, const char* key, const char* what) {
  if (!ok) throw ConfigError(what, key);
}
inline bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }
}  // namespace detail

// Error keys use the names of the text config format.

inline void validate(const PumpConfig& p) {
  using detail::finite_positive;
  using detail::require;
  require(finite_positive(p.wavelength), "pump.wavelength_nm", "must be positive");
  require(finite_positive(p.waist), "pump.waist_mm", "must be positive");
  require(std::isfinite(p.mean_pulse_power) && p.mean_pulse_power >= 0.0, "pump.power_MW",
          "must be non-negative");
  require(finite_positive(p.pulse_duration), "pump.pulse_duration_ns", "must be positive");
  require(p.power_fluct_frac >= 0.0 && p.power_fluct_frac < 1.0, "pump.power_fluct_frac",
          "must lie in [0, 1)");
  require(p.laser_mode_count >= 1, "pump.laser_modes", "must be at least 1");
}

inline void validate(const CrystalConfig& c) {
  using detail::finite_positive;
  using detail::require;
  require(finite_positive(c.length), "crystal.length_mm", "must be positive");
  require(finite_positive(c.degenerate_wavelength), "crystal.wavelength_nm", "must be positive");
  require(std::isfinite(c.emission_angle) && c.emission_angle >= 0.0 &&
              c.emission_angle < std::numbers::pi / 2,
          "crystal.theta0_rad", "must lie in [0, pi/2)");
  require(finite_positive(c.gain_coefficient), "crystal.sigma", "must be positive");
  require(finite_positive(c.sinc_prefactor), "crystal.sinc_prefactor", "must be positive");
  require(std::isfinite(c.detuning_coefficient), "crystal.c_omega", "must be finite");
}

inline void validate(const DetectorConfig& d) {
  using detail::finite_positive;
  using detail::require;
  require(finite_positive(d.pixel_pitch), "detector.pixel_um", "must be positive");
  require(d.width > 0, "detector.width", "must be positive");
  require(d.height > 0, "detector.height", "must be positive");
  require(d.quantum_efficiency > 0.0 && d.quantum_efficiency <= 1.0, "detector.eta",
          "must lie in (0, 1]");
  require(std::isfinite(d.efficiency_fluct) && d.efficiency_fluct >= 0.0, "detector.delta_eta",
          "must be non-negative");
  require(std::isfinite(d.read_noise) && d.read_noise >= 0.0, "detector.read_noise",
          "must be non-negative");
  require(finite_positive(d.focal_length), "detector.focal_mm", "must be positive");
  require(d.saturation > 0 && d.saturation <= 65535, "detector.saturation",
          "must lie in [1, 65535]");
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline void validate(const SynthesisConfig& s) {
  using detail::require;
  require(is_power_of_two(s.grid) && s.grid >= 4, "synthesis.grid",
          "must be a power of two >= 4");
  require(s.modes_min >= 1, "synthesis.modes_min", "must be at least 1");
  require(s.modes_max >= s.modes_min, "synthesis.modes_max", "must be >= synthesis.modes_min");
  if (s.target_gain) {
    require(std::isfinite(*s.target_gain) && *s.target_gain >= 0.0, "synthesis.target_gain",
            "must be non-negative");
  }
}

inline void validate(const AnalysisConfig& a) {
  using detail::require;
  require(a.max_disp >= 1, "analysis.max_disp", "must be at least 1");
  require(a.stride >= 1, "analysis.stride", "must be at least 1");
  if (a.region) require(a.region->area() >= 16, "analysis.region", "needs at least 16 pixels");
}

inline void validate(const ExperimentConfig& cfg) {
  validate(cfg.pump);
  validate(cfg.crystal);
  validate(cfg.detector);
  validate(cfg.synthesis);
  validate(cfg.analysis);
  if (2 * cfg.synthesis.grid > cfg.detector.width || cfg.synthesis.grid > cfg.detector.height) {
    throw ConfigError("two half-planes of synthesis.grid pixels do not fit the detector array",
                      "synthesis.grid");
  }
}

}  // namespace pdcspeckle
