#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "config.hpp"
#include "error.hpp"

namespace pdcspeckle {

/// Transverse wave vector (rad/m).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double norm2(Vec2 v) { return v.x * v.x + v.y * v.y; }

/// sin(x)/x with sinc(0) = 1.
inline double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

/// HWHM of the pump-induced Gaussian factor: sqrt(2 ln 2) / w_p.
inline double gaussian_hwhm(double waist) {
  if (!(waist > 0.0) || !std::isfinite(waist)) {
    throw ConfigError("pump waist must be positive", "pump.waist_mm");
  }
  return std::sqrt(2.0 * std::numbers::ln2) / waist;
}

inline double gaussian_hwhm(const PumpConfig& pump) { return gaussian_hwhm(pump.waist); }

/// HWHM of the phase-matching sinc for the given regime.
inline double sinc_hwhm(const CrystalConfig& crystal, Regime regime) {
  if (!(crystal.length > 0.0)) throw ConfigError("crystal length must be positive", "crystal.length_mm");
  switch (regime) {
    case Regime::NoncollinearLinear: {
      const double t = std::tan(crystal.emission_angle);
      if (!(t > 0.0)) {
        throw ConfigError("noncollinear bandwidth needs a non-zero emission angle",
                          "crystal.theta0_rad");
      }
      return crystal.sinc_prefactor / (crystal.length * t);
    }
    case Regime::CollinearQuadratic:
      // Evaluated as printed: prefactor * (2 pi / (lambda l))^(1/2).
      return crystal.sinc_prefactor *
             std::sqrt(2.0 * std::numbers::pi / (crystal.degenerate_wavelength * crystal.length));
  }
  throw ConfigError("unknown regime", "crystal.regime");
}

/// A_pump = sqrt(P / (pi w^2 / 2)), in sqrt(W)/m.
inline double pump_amplitude(double pulse_power, double waist) {
  return std::sqrt(pulse_power / (std::numbers::pi * waist * waist / 2.0));
}

inline double peak_gain(double pulse_power, const PumpConfig& pump, const CrystalConfig& crystal) {
  return crystal.gain_coefficient * pump_amplitude(pulse_power, pump.waist);
}

/// Pulse power whose peak gain is `gain` for this pump waist.
inline double power_for_gain(double gain, const PumpConfig& pump, const CrystalConfig& crystal) {
  const double a = gain / crystal.gain_coefficient;
  return a * a * std::numbers::pi * pump.waist * pump.waist / 2.0;
}

/// Transverse radius of the exact-matching ring, 2 pi tan(theta0) / lambda.
inline double matching_ring_radius(const CrystalConfig& crystal) {
  return 2.0 * std::numbers::pi * std::tan(crystal.emission_angle) / crystal.degenerate_wavelength;
}

/// Expansion of the longitudinal mismatch about the matching ring,
///   dk = linear (|q| - q0) + quadratic (|q| - q0)^2 + omega_coeff * Omega,
/// with |q| the norm of the symmetric combination (q1 - q2) / 2.
struct DetuningModel {
  double ring_radius = 0.0;
  double linear = 0.0;
  double quadratic = 0.0;
  double omega_coeff = 0.0;

  double operator()(Vec2 q1, Vec2 q2, double omega) const {
    const double r = norm(0.5 * (q1 - q2)) - ring_radius;
    return linear * r + quadratic * r * r + omega_coeff * omega;
  }
};

/// Coefficients chosen so that sinc^2(dk l / 2) falls to one half (argument prefactor / 2)
/// exactly at sinc_hwhm() for the configured regime.
inline DetuningModel detuning_model(const CrystalConfig& crystal) {
  DetuningModel m;
  m.omega_coeff = crystal.detuning_coefficient;
  switch (crystal.regime) {
    case Regime::NoncollinearLinear: {
      m.ring_radius = matching_ring_radius(crystal);
      const double hw = sinc_hwhm(crystal, Regime::NoncollinearLinear);
      m.linear = crystal.sinc_prefactor / (crystal.length * hw);  // == tan(theta0)
      break;
    }
    case Regime::CollinearQuadratic: {
      m.ring_radius = matching_ring_radius(crystal);
      const double hw = sinc_hwhm(crystal, Regime::CollinearQuadratic);
      m.quadratic = crystal.sinc_prefactor / (crystal.length * hw * hw);
      break;
    }
  }
  return m;
}

inline double delta_k(Vec2 q1, Vec2 q2, double omega, const CrystalConfig& crystal) {
  return detuning_model(crystal)(q1, q2, omega);
}

/// g sinc(dk l / 2) exp(-|q1 + q2|^2 w_p^2 / 4).
inline std::complex<double> pair_amplitude(Vec2 q1, Vec2 q2, double omega, double gain,
                                           double waist, const CrystalConfig& crystal,
                                           const DetuningModel& model) {
  const double dk = model(q1, q2, omega);
  const double gauss = std::exp(-norm2(q1 + q2) * waist * waist / 4.0);
  return {gain * sinc(dk * crystal.length / 2.0) * gauss, 0.0};
}

/// Pair amplitude at the pump's nominal peak gain.
inline std::complex<double> pair_amplitude(Vec2 q1, Vec2 q2, double omega, const PumpConfig& pump,
                                           const CrystalConfig& crystal) {
  return pair_amplitude(q1, q2, omega, peak_gain(pump.mean_pulse_power, pump, crystal), pump.waist,
                        crystal, detuning_model(crystal));
}

struct CoherencePrediction {
  double delta_q_gauss = 0.0;
  double delta_q_sinc = 0.0;
  Regime regime = Regime::NoncollinearLinear;
  /// delta_q_gauss / delta_q_sinc; below one the pump waist sets the coherence area.
  double width_ratio = 0.0;
  double coherence_radius_q = 0.0;
  double coherence_radius_m = 0.0;
  double coherence_radius_pixels = 0.0;
};

/// Far-field position x = (lambda f / 2 pi) q of a transverse wave vector magnitude.
inline double far_field_position(double q, double wavelength, double focal_length) {
  return wavelength * focal_length / (2.0 * std::numbers::pi) * q;
}

/// Low-gain coherence radius: the narrower of the two factors wins.
inline CoherencePrediction predict_coherence(const PumpConfig& pump, const CrystalConfig& crystal,
                                             const DetectorConfig& detector) {
  CoherencePrediction p;
  p.regime = crystal.regime;
  p.delta_q_gauss = gaussian_hwhm(pump);
  p.delta_q_sinc = sinc_hwhm(crystal, crystal.regime);
  p.width_ratio = p.delta_q_gauss / p.delta_q_sinc;
  p.coherence_radius_q = std::min(p.delta_q_gauss, p.delta_q_sinc);
  p.coherence_radius_m =
      far_field_position(p.coherence_radius_q, crystal.degenerate_wavelength, detector.focal_length);
  p.coherence_radius_pixels = p.coherence_radius_m / detector.pixel_pitch;
  return p;
}

}  // namespace pdcspeckle
