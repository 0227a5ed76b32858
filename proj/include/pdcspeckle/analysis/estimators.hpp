#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>

#include "../config.hpp"
#include "../detector.hpp"
#include "../error.hpp"
#include "../image.hpp"
#include "correlation.hpp"
#include "radius.hpp"

namespace pdcspeckle {

/// Noise terms of the single-frame variance model
///   <d^2 N> = shot <N> + <N>^2 / M + delta_eta^2 <N>^2 + read_noise^2.
struct NoiseModel {
  double efficiency = 0.8;
  double efficiency_fluct = 0.03;
  double read_noise = 4.0;
  /// 1 for photocounts, 0 for an intensity map taken before detection.
  double shot = 1.0;

  static NoiseModel from(const DetectorConfig& d) {
    return {d.quantum_efficiency, d.efficiency_fluct, d.read_noise, d.shot_noise ? 1.0 : 0.0};
  }
  /// Field intensity before detection: no detector terms at all.
  static NoiseModel ideal() { return {1.0, 0.0, 0.0, 0.0}; }
};

inline double thermal_variance(double mean, double modes, const NoiseModel& nm) {
  return nm.shot * mean + mean * mean / modes +
         nm.efficiency_fluct * nm.efficiency_fluct * mean * mean + nm.read_noise * nm.read_noise;
}

struct ModeEstimate {
  double value = 0.0;  ///< +inf when Poisson-limited
  double error = 0.0;
  bool poisson_limited = false;
  double mean = 0.0;
  double variance = 0.0;
  std::size_t samples = 0;
};

/// Inverts the variance model for M from the region mean and variance. Optional standard
/// errors of the two moments are propagated to first order.
inline ModeEstimate temporal_modes_from_moments(double mean, double variance, const NoiseModel& nm,
                                                double mean_error = 0.0, double variance_error = 0.0) {
  if (!(mean > 0.0) || !std::isfinite(mean) || !std::isfinite(variance)) {
    throw AnalysisError(AnalysisFailure::InvalidInput, "mode estimate needs a positive region mean");
  }
  ModeEstimate e;
  e.mean = mean;
  e.variance = variance;
  const double d2 = nm.efficiency_fluct * nm.efficiency_fluct;
  const double excess =
      variance - nm.shot * mean - d2 * mean * mean - nm.read_noise * nm.read_noise;
  const double scale = std::max({variance, mean * mean, 1.0});
  if (std::abs(excess) <= 1e-12 * scale) {
    e.value = std::numeric_limits<double>::infinity();
    e.error = std::numeric_limits<double>::infinity();
    e.poisson_limited = true;
    return e;
  }
  if (excess < 0.0) {
    throw AnalysisError(AnalysisFailure::SubThermalVariance,
                        "region variance below the shot + detector noise floor");
  }
  e.value = mean * mean / excess;
  const double dm_dvar = -mean * mean / (excess * excess);
  const double dm_dmean = 2.0 * mean / excess +
                          mean * mean * (nm.shot + 2.0 * d2 * mean) / (excess * excess);
  e.error = std::hypot(dm_dvar * variance_error, dm_dmean * mean_error);
  return e;
}

/// Spatial moments over a region (optionally decimated) of a single frame.
struct RegionMoments {
  double mean = 0.0;
  double variance = 0.0;
  double mean_error = 0.0;
  double variance_error = 0.0;
  std::size_t samples = 0;
};

template <class T>
RegionMoments region_moments(ImageView<T> image, const Region& region, std::size_t stride = 1) {
  check_region(region, image.width(), image.height());
  if (stride == 0) throw AnalysisError(AnalysisFailure::InvalidInput, "stride must be positive");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t y = region.y; y < region.y + region.height; y += stride) {
    for (std::size_t x = region.x; x < region.x + region.width; x += stride) {
      sum += image(x, y);
      ++n;
    }
  }
  if (n < 2) throw AnalysisError(AnalysisFailure::InvalidInput, "too few pixels after decimation");
  const double mean = sum / static_cast<double>(n);
  double m2 = 0.0;
  double m4 = 0.0;
  for (std::size_t y = region.y; y < region.y + region.height; y += stride) {
    for (std::size_t x = region.x; x < region.x + region.width; x += stride) {
      const double d = image(x, y) - mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
  }
  const double nn = static_cast<double>(n);
  RegionMoments r;
  r.samples = n;
  r.mean = mean;
  r.variance = m2 / (nn - 1.0);
  const double pop = m2 / nn;
  r.mean_error = std::sqrt(r.variance / nn);
  r.variance_error = std::sqrt(std::max(0.0, (m4 / nn - pop * pop) / nn));
  return r;
}

/// Temporal-mode count from the spatial statistics of one frame.
template <class T>
ModeEstimate estimate_temporal_modes(ImageView<T> image, const Region& region, const NoiseModel& nm,
                                     std::size_t stride = 1) {
  const RegionMoments m = region_moments(image, region, stride);
  ModeEstimate e = temporal_modes_from_moments(m.mean, m.variance, nm, m.mean_error, m.variance_error);
  e.samples = m.samples;
  return e;
}

/// <N> = eta eta_coll M sinh^2(g).
inline double mean_counts_from_gain(double gain, double efficiency, double eta_coll, double modes) {
  const double s = std::sinh(gain);
  return efficiency * eta_coll * modes * s * s;
}

struct GainEstimate {
  double value = 0.0;
  double error = 0.0;
};

/// g = asinh(sqrt(<N> / (eta eta_coll M))).
inline GainEstimate estimate_gain(double mean_counts, double efficiency, double eta_coll, double modes,
                                  double mean_error = 0.0, double modes_error = 0.0) {
  const double k = efficiency * eta_coll;
  if (!(mean_counts >= 0.0) || !(modes >= 1.0) || !(k > 0.0) || k > 1.0) {
    throw AnalysisError(AnalysisFailure::InvalidInput,
                        "gain estimate needs <N> >= 0, M >= 1 and 0 < eta eta_coll <= 1");
  }
  GainEstimate g;
  if (std::isinf(modes)) return g;
  const double x = mean_counts / (k * modes);
  g.value = std::asinh(std::sqrt(x));
  if (x > 0.0) {
    const double dg_dx = 1.0 / (2.0 * std::sqrt(x) * std::sqrt(1.0 + x));
    const double rel = std::hypot(mean_counts > 0.0 ? mean_error / mean_counts : 0.0, modes_error / modes);
    g.error = dg_dx * x * rel;
  }
  return g;
}

/// Region-level estimates for one frame.
struct EstimateReport {
  double radius_pixels = 0.0;
  double radius_error = 0.0;
  double modes = 0.0;
  double modes_error = 0.0;
  double gain = 0.0;
  double gain_error = 0.0;
  double eta_coll = 0.0;
  double mean_counts = 0.0;
  double mean_counts_error = 0.0;
};

/// Full single-frame chain: autocorrelation shoulder radius, mode count, collection
/// efficiency (one pixel over pi R^2) and gain.
template <class T>
EstimateReport analyze_frame(ImageView<T> image, const Region& region, const NoiseModel& nm,
                             const AnalysisConfig& cfg) {
  const CorrelationMap c = autocorrelation(image, region, cfg.max_disp);
  const RadiusEstimate r = speckle_radius(c, cfg.radius);
  const RegionMoments m = region_moments(image, region, cfg.stride);
  const ModeEstimate modes =
      temporal_modes_from_moments(m.mean, m.variance, nm, m.mean_error, m.variance_error);

  EstimateReport rep;
  rep.radius_pixels = r.radius;
  rep.radius_error = r.error;
  rep.modes = std::max(1.0, modes.value);
  rep.modes_error = modes.error;
  rep.mean_counts = m.mean;
  rep.mean_counts_error = m.mean_error;
  rep.eta_coll = collection_efficiency(1.0, std::numbers::pi * r.radius * r.radius);
  if (modes.poisson_limited) {
    throw AnalysisError(AnalysisFailure::SubThermalVariance, "Poisson-limited region: no excess noise");
  }
  const GainEstimate g = estimate_gain(m.mean, nm.efficiency, rep.eta_coll, std::max(1.0, modes.value),
                                       m.mean_error, modes.error);
  rep.gain = g.value;
  rep.gain_error = g.error;
  return rep;
}

}  // namespace pdcspeckle
