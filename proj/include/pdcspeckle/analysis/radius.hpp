#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "../config.hpp"
#include "../error.hpp"
#include "correlation.hpp"

namespace pdcspeckle {

struct RadiusEstimate {
  double radius = 0.0;  ///< pixels, in the requested convention
  double error = 0.0;   ///< 1-sigma
  double width = 0.0;   ///< fitted Gaussian s
  double amplitude = 0.0;
  std::size_t points = 0;
};

/// Radius of a Gaussian A exp(-r^2 / (2 s^2)) under the given convention.
inline double radius_from_width(double s, RadiusConvention convention) {
  return convention == RadiusConvention::Hwhm ? s * std::sqrt(2.0 * std::numbers::ln2)
                                              : s * std::numbers::sqrt2;
}

namespace detail {

struct ShoulderSample {
  double r2;
  double c;
};

inline double shoulder_rss(const std::vector<ShoulderSample>& pts, double s, double* amp) {
  double cw = 0.0;
  double ww = 0.0;
  for (const auto& p : pts) {
    const double w = std::exp(-p.r2 / (2.0 * s * s));
    cw += p.c * w;
    ww += w * w;
  }
  const double a = ww > 0.0 ? cw / ww : 0.0;
  double rss = 0.0;
  for (const auto& p : pts) {
    const double r = p.c - a * std::exp(-p.r2 / (2.0 * s * s));
    rss += r * r;
  }
  if (amp) *amp = a;
  return rss;
}

}  // namespace detail

/// Coherence radius from the shoulder of an autocorrelation map.
///
/// The xi = 0 entry (pixel-scale noise spike) is excluded; a centered Gaussian
/// A exp(-|xi|^2 / (2 s^2)) is least-squares fitted to every defined entry with
/// 1 <= |xi| <= max_disp. The amplitude is free, so only the shape matters.
inline RadiusEstimate speckle_radius(const CorrelationMap& map,
                                     RadiusConvention convention = RadiusConvention::Hwhm) {
  if (map.kind != CorrelationMap::Kind::Auto) {
    throw AnalysisError(AnalysisFailure::InvalidInput, "radius needs an autocorrelation map");
  }
  if (map.max_disp < 4) {
    throw AnalysisError(AnalysisFailure::InvalidInput, "radius fit needs max displacement >= 4");
  }
  std::vector<detail::ShoulderSample> pts;
  const double rmax2 = static_cast<double>(map.max_disp) * map.max_disp;
  for (int dy = -map.max_disp; dy <= map.max_disp; ++dy) {
    for (int dx = -map.max_disp; dx <= map.max_disp; ++dx) {
      const double r2 = double(dx) * dx + double(dy) * dy;
      if (r2 < 1.0 || r2 > rmax2 || !map.defined(dx, dy)) continue;
      pts.push_back({r2, map.at(dx, dy)});
    }
  }
  if (pts.size() < 3) {
    throw AnalysisError(AnalysisFailure::DegenerateRegion, "autocorrelation map has no usable shoulder");
  }

  // Profile the amplitude out and scan s on a log grid, then golden-section the best bracket.
  const double s_lo = 0.05;
  const double s_hi = 4.0 * map.max_disp;
  constexpr int kScan = 160;
  std::array<double, kScan> grid{};
  std::array<double, kScan> rss{};
  int best = 0;
  for (int k = 0; k < kScan; ++k) {
    grid[k] = s_lo * std::pow(s_hi / s_lo, double(k) / (kScan - 1));
    rss[k] = detail::shoulder_rss(pts, grid[k], nullptr);
    if (rss[k] < rss[best]) best = k;
  }
  if (best == kScan - 1) {
    throw AnalysisError(AnalysisFailure::FitFailure,
                        "shoulder does not decay within the map (width at the upper bound)");
  }
  double a = grid[std::max(0, best - 1)];
  double b = grid[std::min(kScan - 1, best + 1)];
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = detail::shoulder_rss(pts, x1, nullptr);
  double f2 = detail::shoulder_rss(pts, x2, nullptr);
  while (b - a > 1e-12 * b) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = detail::shoulder_rss(pts, x1, nullptr);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = detail::shoulder_rss(pts, x2, nullptr);
    }
  }
  double s = 0.5 * (a + b);
  double amp = 0.0;
  detail::shoulder_rss(pts, s, &amp);

  // Gauss-Newton polish on (A, s); the profiled objective is flat near its minimum.
  for (int it = 0; it < 20; ++it) {
    double jaa = 0.0, jas = 0.0, jss = 0.0, ga = 0.0, gs = 0.0;
    for (const auto& p : pts) {
      const double e = std::exp(-p.r2 / (2.0 * s * s));
      const double da = e;
      const double ds = amp * e * p.r2 / (s * s * s);
      const double r = p.c - amp * e;
      jaa += da * da;
      jas += da * ds;
      jss += ds * ds;
      ga += da * r;
      gs += ds * r;
    }
    const double det = jaa * jss - jas * jas;
    if (!(det > 0.0)) break;
    const double step_a = (jss * ga - jas * gs) / det;
    const double step_s = (jaa * gs - jas * ga) / det;
    if (!(s + step_s > 0.0)) break;
    amp += step_a;
    s += step_s;
    if (std::abs(step_s) <= 1e-14 * s) break;
  }

  if (!(amp > 0.0)) {
    throw AnalysisError(AnalysisFailure::FitFailure, "autocorrelation shoulder has non-positive amplitude");
  }

  double jaa = 0.0, jas = 0.0, jss = 0.0, rss_final = 0.0;
  for (const auto& p : pts) {
    const double e = std::exp(-p.r2 / (2.0 * s * s));
    const double ds = amp * e * p.r2 / (s * s * s);
    const double r = p.c - amp * e;
    jaa += e * e;
    jas += e * ds;
    jss += ds * ds;
    rss_final += r * r;
  }
  const double det = jaa * jss - jas * jas;
  if (!(det > 0.0)) {
    throw AnalysisError(AnalysisFailure::FitFailure, "degenerate autocorrelation map: singular curvature");
  }
  const double sigma2 = rss_final / static_cast<double>(pts.size() - 2);
  const double var_s = sigma2 * jaa / det;

  RadiusEstimate out;
  out.width = s;
  out.amplitude = amp;
  out.points = pts.size();
  out.radius = radius_from_width(s, convention);
  out.error = radius_from_width(std::sqrt(std::max(0.0, var_s)), convention);
  return out;
}

}  // namespace pdcspeckle
