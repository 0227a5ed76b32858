#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "../error.hpp"

namespace pdcspeckle {

struct FitPoint {
  double x = 0.0;
  double y = 0.0;
};

struct FitResult {
  std::vector<double> parameters;
  std::vector<double> errors;
  double residual_norm = 0.0;
  std::size_t points = 0;
};

/// Residual scale of the sinh^2 fit. Relative residuals (y / f - 1) suit multiplicative
/// noise, which dominates photon-number data spanning several decades.
enum class Sinh2Residual { Absolute, Relative };

namespace detail {

/// Residual and its sigma-derivative for one point; false when the model overflows or,
/// for relative residuals, vanishes.
inline bool sinh2_residual(const FitPoint& p, double k, double sigma, Sinh2Residual mode, double& r,
                           double& dr) {
  const double arg = sigma * p.x;
  if (std::abs(arg) > 350.0) return false;
  const double sh = std::sinh(arg);
  const double f = k * sh * sh;
  const double df = k * p.x * std::sinh(2.0 * arg);
  if (mode == Sinh2Residual::Absolute) {
    r = p.y - f;
    dr = -df;
    return true;
  }
  if (!(f > 0.0)) return false;
  r = p.y / f - 1.0;
  dr = -p.y * df / (f * f);
  return true;
}

inline double sinh2_sse(std::span<const FitPoint> pts, double k, double sigma, Sinh2Residual mode) {
  double sse = 0.0;
  for (const auto& p : pts) {
    double r = 0.0;
    double dr = 0.0;
    if (!sinh2_residual(p, k, sigma, mode, r, dr)) return std::numeric_limits<double>::infinity();
    sse += r * r;
  }
  return sse;
}

}  // namespace detail

/// One-parameter fit of y = k sinh^2(sigma x) with k held fixed.
///
/// A log-spaced scan over [sigma_min, sigma_max] brackets the minimum, golden-section
/// search narrows it to 1e-9 relative, and Gauss-Newton steps polish the result. The
/// standard error is sqrt(s^2 / J^T J) with s^2 = RSS / (n - 1).
inline FitResult fit_sinh2(std::span<const FitPoint> pts, double k, double sigma_min = 1e-6,
                           double sigma_max = 1e6, Sinh2Residual mode = Sinh2Residual::Relative) {
  if (pts.size() < 3) throw AnalysisError(AnalysisFailure::InvalidInput, "sinh^2 fit needs at least 3 points");
  if (!(k > 0.0)) throw AnalysisError(AnalysisFailure::InvalidInput, "sinh^2 fit needs k > 0");
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min)) {
    throw AnalysisError(AnalysisFailure::InvalidInput, "invalid sigma range");
  }
  for (const auto& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x == 0.0) {
      throw AnalysisError(AnalysisFailure::InvalidInput, "sinh^2 fit needs finite points with x != 0");
    }
  }
  auto sse = [&](double s) { return detail::sinh2_sse(pts, k, s, mode); };

  constexpr int kScan = 400;
  std::vector<double> grid(kScan);
  std::vector<double> values(kScan);
  int best = 0;
  for (int i = 0; i < kScan; ++i) {
    grid[i] = sigma_min * std::pow(sigma_max / sigma_min, double(i) / (kScan - 1));
    values[i] = sse(grid[i]);
    if (values[i] < values[best]) best = i;
  }
  if (best == 0 || best == kScan - 1 || !std::isfinite(values[best])) {
    throw AnalysisError(AnalysisFailure::FitRange, "no bracketed minimum inside the sigma range");
  }

  double a = grid[best - 1];
  double b = grid[best + 1];
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = sse(x1);
  double f2 = sse(x2);
  while (b - a > 1e-9 * b) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = sse(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = sse(x2);
    }
  }
  double sigma = 0.5 * (a + b);

  auto normal_terms = [&](double s, double& jtr, double& jtj) {
    jtr = jtj = 0.0;
    for (const auto& p : pts) {
      double r = 0.0;
      double dr = 0.0;
      detail::sinh2_residual(p, k, s, mode, r, dr);
      jtr += dr * r;
      jtj += dr * dr;
    }
  };
  for (int it = 0; it < 20; ++it) {
    double jtr, jtj;
    normal_terms(sigma, jtr, jtj);
    if (!(jtj > 0.0)) break;
    const double next = sigma - jtr / jtj;
    if (!(next > a - (b - a)) || !(next < b + (b - a))) break;
    if (sse(next) > sse(sigma)) break;
    const double step = next - sigma;
    sigma = next;
    if (std::abs(step) <= 1e-15 * sigma) break;
  }

  double jtr, jtj;
  normal_terms(sigma, jtr, jtj);
  const double rss = sse(sigma);
  FitResult out;
  out.points = pts.size();
  out.parameters = {sigma};
  out.residual_norm = std::sqrt(rss);
  const double s2 = rss / static_cast<double>(pts.size() - 1);
  out.errors = {jtj > 0.0 ? std::sqrt(s2 / jtj) : std::numeric_limits<double>::infinity()};
  return out;
}

/// Ordinary least squares y = slope x + intercept. Parameters are {slope, intercept}.
/// With exactly two points the line interpolates them and the errors are NaN.
inline FitResult fit_linear(std::span<const FitPoint> pts) {
  const std::size_t n = pts.size();
  if (n < 2) throw AnalysisError(AnalysisFailure::InvalidInput, "linear fit needs at least 2 points");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : pts) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
  }
  if (!(sxx > 1e-300) || !(sxx > 1e-14 * (mx * mx * double(n)))) {
    throw AnalysisError(AnalysisFailure::RankDeficient, "linear fit needs distinct abscissae");
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (const auto& p : pts) {
    const double r = p.y - (slope * p.x + intercept);
    rss += r * r;
  }
  FitResult out;
  out.points = n;
  out.parameters = {slope, intercept};
  out.residual_norm = std::sqrt(rss);
  if (n == 2) {
    out.errors = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  } else {
    const double s2 = rss / double(n - 2);
    out.errors = {std::sqrt(s2 / sxx), std::sqrt(s2 * (1.0 / double(n) + mx * mx / sxx))};
  }
  return out;
}

}  // namespace pdcspeckle
