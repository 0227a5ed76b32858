#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "config.hpp"
#include "fft.hpp"
#include "image.hpp"
#include "phasematch.hpp"
#include "random.hpp"

namespace pdcspeckle {

/// Square near-field sampling lattice centered on the pump axis.
struct NearFieldGrid {
  std::size_t size = 0;
  double spacing = 0.0;

  double extent() const noexcept { return static_cast<double>(size) * spacing; }
  double coordinate(std::size_t i) const noexcept {
    return (static_cast<double>(i) - static_cast<double>(size / 2)) * spacing;
  }
  /// Far-field sample spacing of the unitary DFT, 2 pi / extent.
  double q_spacing() const noexcept { return 2.0 * std::numbers::pi / extent(); }
};

/// One far-field sample per detector pixel: dq = 2 pi pitch / (lambda f).
inline double pixel_q_spacing(const DetectorConfig& det, double wavelength) {
  return 2.0 * std::numbers::pi * det.pixel_pitch / (wavelength * det.focal_length);
}

inline NearFieldGrid near_field_grid(const DetectorConfig& det, const CrystalConfig& crystal,
                                     std::size_t n) {
  return {n, crystal.degenerate_wavelength * det.focal_length /
                 (static_cast<double>(n) * det.pixel_pitch)};
}

/// HWHM of sinh^2(g(x)) over HWHM of g(x)^2 for a Gaussian profile with peak `g`.
/// Below one: the amplified region is narrower than the pump.
inline double effective_waist_ratio(double g) {
  if (!(g > 1e-6)) return 1.0;
  // Half maximum of sinh^2 at local gain y with sinh(y) = sinh(g) / sqrt(2).
  const double y = g > 20.0 ? g - 0.5 * std::numbers::ln2 : std::asinh(std::sinh(g) / std::numbers::sqrt2);
  const double t_sinh = -std::log(y / g);        // r^2 / w^2 at half maximum of sinh^2
  const double t_square = 0.5 * std::numbers::ln2;  // r^2 / w^2 at half maximum of g^2
  return std::sqrt(t_sinh / t_square);
}

struct GainProfile {
  NearFieldGrid grid;
  Image<double> gain;
  double peak = 0.0;
  double effective_waist = 0.0;
};

/// g(x) = sigma A_pump exp(-|x|^2 / w_p^2) sampled on `grid`.
inline GainProfile build_gain_profile(const PumpConfig& pump, const CrystalConfig& crystal,
                                      double pulse_power, const NearFieldGrid& grid) {
  if (!(pulse_power >= 0.0) || !std::isfinite(pulse_power)) {
    throw ConfigError("pulse power must be finite and non-negative", "pump.power_MW");
  }
  GainProfile p;
  p.grid = grid;
  p.peak = peak_gain(pulse_power, pump, crystal);
  p.effective_waist = pump.waist * effective_waist_ratio(p.peak);
  p.gain = Image<double>(grid.size, grid.size, 0.0);
  if (p.peak == 0.0) return p;
  const double inv_w2 = 1.0 / (pump.waist * pump.waist);
  for (std::size_t j = 0; j < grid.size; ++j) {
    const double y = grid.coordinate(j);
    for (std::size_t i = 0; i < grid.size; ++i) {
      const double x = grid.coordinate(i);
      p.gain(i, j) = p.peak * std::exp(-(x * x + y * y) * inv_w2);
    }
  }
  return p;
}

/// Spatially flat gain; used for per-mode statistics checks.
inline GainProfile uniform_gain_profile(const NearFieldGrid& grid, double g) {
  GainProfile p;
  p.grid = grid;
  p.peak = g;
  p.effective_waist = grid.extent();
  p.gain = Image<double>(grid.size, grid.size, g);
  return p;
}

/// Far-field amplitudes of one temporal mode. Arrays are center-shifted: index i holds
/// the transverse offset (i - n/2) dq from the half-plane center.
struct SpeckleField {
  double q_spacing = 0.0;
  Image<std::complex<double>> signal;
  Image<std::complex<double>> idler;
  std::uint32_t mode_index = 0;
  double pulse_gain = 0.0;
  SamplingModel sampling = SamplingModel::Glauber;

  /// Symmetric-ordering offset removed when converting |amplitude|^2 to photons.
  double vacuum_offset() const noexcept { return sampling == SamplingModel::Wigner ? 0.5 : 0.0; }
};

/// Center-shifted index of the partner sample at -q.
constexpr std::size_t twin_index(std::size_t i, std::size_t n) noexcept { return (n - i) % n; }

namespace detail {

inline void center_shift(std::span<const std::complex<double>> raw, std::size_t n,
                         Image<std::complex<double>>& out) {
  out = Image<std::complex<double>>(n, n);
  const std::size_t h = n / 2;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) out(i, j) = raw[((j + h) % n) * n + (i + h) % n];
  }
}

/// Multiplies a half-plane centered at `center` by |sinc(dk l / 2)|.
inline void apodize(Image<std::complex<double>>& field, Vec2 center, double dq,
                    const CrystalConfig& crystal, const DetuningModel& model) {
  const std::size_t n = field.width();
  const double h = static_cast<double>(n / 2);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 q = center + Vec2{(static_cast<double>(i) - h) * dq, (static_cast<double>(j) - h) * dq};
      field(i, j) *= std::abs(sinc(model(q, Vec2{-q.x, -q.y}, 0.0) * crystal.length / 2.0));
    }
  }
}

}  // namespace detail

/// Draws one signal/idler temporal mode.
///
/// Wigner sampling follows the two-mode squeezing map on symmetric-ordered vacuum
/// (variance 1/2 per complex sample):
///   b_s = cosh(g) a_s + sinh(g) conj(a_i),   b_i = cosh(g) a_i + sinh(g) conj(a_s).
/// Glauber sampling draws the normally-ordered classical twin field
///   E_s = sinh(g) z,   E_i = sinh(g) conj(z),   E|z|^2 = 1,
/// whose far-field intensities are exactly thermal with mean sinh^2(g).
/// Both are transformed with a unitary DFT; the optional phase-matching envelope is
/// applied afterwards in q-space.
inline SpeckleField synthesize_mode_pair(const GainProfile& profile, const CrystalConfig& crystal,
                                         const SynthesisConfig& synth, std::uint64_t seed,
                                         const UnitaryFft2d& fft, std::uint32_t mode_index = 0) {
  const std::size_t n = profile.grid.size;
  if (!is_power_of_two(n) || profile.gain.width() != n || profile.gain.height() != n) {
    throw ConfigError("gain profile must be a square power-of-two grid", "synthesis.grid");
  }
  if (fft.size() != n) throw ConfigError("transform size does not match the gain grid", "synthesis.grid");

  Engine rng(seed);
  std::vector<std::complex<double>> sig(n * n);
  std::vector<std::complex<double>> idl(n * n);
  const auto gains = profile.gain.pixels();
  for (std::size_t k = 0; k < n * n; ++k) {
    const double g = gains[k];
    if (!std::isfinite(g) || g < 0.0) throw ConfigError("gain profile has a non-finite or negative value");
    const double s = std::sinh(g);
    if (synth.sampling == SamplingModel::Wigner) {
      const double c = std::cosh(g);
      const auto a_s = complex_gaussian(rng, 0.5);
      const auto a_i = complex_gaussian(rng, 0.5);
      const auto partner = synth.twin ? a_s : complex_gaussian(rng, 0.5);
      sig[k] = c * a_s + s * std::conj(a_i);
      idl[k] = c * a_i + s * std::conj(partner);
    } else {
      const auto z = complex_gaussian(rng, 1.0);
      const auto partner = synth.twin ? z : complex_gaussian(rng, 1.0);
      sig[k] = s * z;
      idl[k] = s * std::conj(partner);
    }
  }
  fft.forward(sig);
  fft.forward(idl);

  SpeckleField field;
  field.q_spacing = profile.grid.q_spacing();
  field.mode_index = mode_index;
  field.pulse_gain = profile.peak;
  field.sampling = synth.sampling;
  detail::center_shift(sig, n, field.signal);
  detail::center_shift(idl, n, field.idler);

  if (synth.apodize) {
    const DetuningModel model = detuning_model(crystal);
    const double q0 = model.ring_radius;
    detail::apodize(field.signal, Vec2{-q0, 0.0}, field.q_spacing, crystal, model);
    detail::apodize(field.idler, Vec2{q0, 0.0}, field.q_spacing, crystal, model);
  }
  return field;
}

struct PulseDraw {
  double power = 0.0;
  double gain_peak = 0.0;
  std::uint32_t modes = 1;
  /// (1 + eps) with eps ~ N(0, power_fluct_frac).
  double drift_factor = 1.0;
  /// Mean of n unit-mean exponentials; relative std sqrt(1/n).
  double thermal_factor = 1.0;
  /// sqrt(1 - 1/n), the n-mode laser fluctuation reported for comparison.
  double nominal_laser_fluct = 0.0;
};

/// Per-shot pump power, peak gain and effective temporal-mode count.
/// M is log-uniform on [modes_min, modes_max], rounded to an integer.
inline PulseDraw draw_pulse(const PumpConfig& pump, double gain_coefficient,
                            std::uint32_t modes_min, std::uint32_t modes_max, std::uint64_t seed) {
  if (pump.laser_mode_count < 1) throw ConfigError("must be at least 1", "pump.laser_modes");
  Engine rng(seed);
  PulseDraw d;
  if (pump.power_fluct_frac > 0.0) {
    std::normal_distribution<double> drift(0.0, pump.power_fluct_frac);
    d.drift_factor = 1.0 + drift(rng);
  }
  if (pump.laser_mode_count != kUnboundedLaserModes) {
    const auto n = static_cast<double>(pump.laser_mode_count);
    std::gamma_distribution<double> thermal(n, 1.0);
    d.thermal_factor = thermal(rng) / n;
    d.nominal_laser_fluct = std::sqrt(1.0 - 1.0 / n);
  } else {
    d.nominal_laser_fluct = 1.0;
  }
  d.power = std::max(0.0, pump.mean_pulse_power * d.drift_factor * d.thermal_factor);
  d.gain_peak = gain_coefficient * pump_amplitude(d.power, pump.waist);

  if (modes_min == modes_max) {
    d.modes = modes_min;
  } else {
    std::uniform_real_distribution<double> u(std::log(static_cast<double>(modes_min)),
                                             std::log(static_cast<double>(modes_max)));
    const double m = std::round(std::exp(u(rng)));
    d.modes = static_cast<std::uint32_t>(std::clamp(m, double(modes_min), double(modes_max)));
  }
  return d;
}

/// Pump settings actually used for synthesis: a target gain overrides the configured power.
inline PumpConfig effective_pump(const ExperimentConfig& cfg) {
  PumpConfig pump = cfg.pump;
  if (cfg.synthesis.target_gain) {
    pump.mean_pulse_power = power_for_gain(*cfg.synthesis.target_gain, pump, cfg.crystal);
  }
  return pump;
}

/// Accumulated photon-number map of one laser shot.
/// Layout: width 2n, height n. The left half is the signal half-plane, the right half the
/// idler; pixel (x, y) and its point reflection (2n-1-x, n-1-y) carry the q / -q pair.
struct FrameIntensity {
  Image<double> intensity;
  PulseDraw pulse;
  std::uint64_t seed = 0;
  double q_spacing = 0.0;
  double effective_waist = 0.0;
};

inline FrameIntensity synthesize_frame_intensity(const ExperimentConfig& cfg, std::uint64_t seed,
                                                 const UnitaryFft2d& fft) {
  const std::size_t n = cfg.synthesis.grid;
  const PumpConfig pump = effective_pump(cfg);

  FrameIntensity out;
  out.seed = seed;
  out.pulse = draw_pulse(pump, cfg.crystal.gain_coefficient, cfg.synthesis.modes_min,
                         cfg.synthesis.modes_max, derive_seed(seed, 0));
  const NearFieldGrid grid = near_field_grid(cfg.detector, cfg.crystal, n);
  const GainProfile profile = build_gain_profile(pump, cfg.crystal, out.pulse.power, grid);
  out.q_spacing = grid.q_spacing();
  out.effective_waist = profile.effective_waist;

  Image<double> sig(n, n, 0.0);
  Image<double> idl(n, n, 0.0);
  for (std::uint32_t m = 0; m < out.pulse.modes; ++m) {
    const SpeckleField f =
        synthesize_mode_pair(profile, cfg.crystal, cfg.synthesis, derive_seed(seed, 1 + m), fft, m);
    const double off = f.vacuum_offset();
    for (std::size_t k = 0; k < n * n; ++k) {
      sig.pixels()[k] += std::norm(f.signal.pixels()[k]) - off;
      idl.pixels()[k] += std::norm(f.idler.pixels()[k]) - off;
    }
  }

  // Vacuum-subtracted sums are clamped once, after all modes.
  out.intensity = Image<double>(2 * n, n, 0.0);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      out.intensity(x, y) = std::max(0.0, sig(x, y));
      out.intensity(2 * n - 1 - x, n - 1 - y) =
          std::max(0.0, idl(twin_index(x, n), twin_index(y, n)));
    }
  }
  return out;
}

inline FrameIntensity synthesize_frame_intensity(const ExperimentConfig& cfg, std::uint64_t seed) {
  const UnitaryFft2d fft(cfg.synthesis.grid);
  return synthesize_frame_intensity(cfg, seed, fft);
}

}  // namespace pdcspeckle
