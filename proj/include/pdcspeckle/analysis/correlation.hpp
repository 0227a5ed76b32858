#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "../config.hpp"
#include "../error.hpp"
#include "../image.hpp"

namespace pdcspeckle {

/// Correlation values over integer displacements |dx|, |dy| <= max_disp.
/// Undefined entries (zero variance) are NaN.
struct CorrelationMap {
  enum class Kind { Auto, Cross };

  int max_disp = 0;
  Kind kind = Kind::Auto;
  std::vector<double> values;

  CorrelationMap() = default;
  CorrelationMap(int max_disp_, Kind kind_)
      : max_disp(max_disp_),
        kind(kind_),
        values(static_cast<std::size_t>((2 * max_disp_ + 1) * (2 * max_disp_ + 1)),
               std::numeric_limits<double>::quiet_NaN()) {}

  int side() const noexcept { return 2 * max_disp + 1; }
  double& at(int dx, int dy) {
    return values[static_cast<std::size_t>((dy + max_disp) * side() + dx + max_disp)];
  }
  double at(int dx, int dy) const {
    return values[static_cast<std::size_t>((dy + max_disp) * side() + dx + max_disp)];
  }
  bool defined(int dx, int dy) const { return !std::isnan(at(dx, dy)); }
  bool all_undefined() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isnan(v); });
  }
};

inline bool fits_inside(const Region& r, std::size_t width, std::size_t height) {
  return r.width > 0 && r.height > 0 && r.x + r.width <= width && r.y + r.height <= height;
}

inline void check_region(const Region& r, std::size_t width, std::size_t height) {
  if (!fits_inside(r, width, height)) {
    throw AnalysisError(AnalysisFailure::InvalidInput, "region lies outside the frame");
  }
  if (r.area() < 16) {
    throw AnalysisError(AnalysisFailure::InvalidInput, "region needs at least 16 pixels");
  }
}

/// Point reflection of a region through the frame center (the q -> -q partner).
inline Region mirrored_region(const Region& r, std::size_t width, std::size_t height) {
  return {width - r.x - r.width, height - r.y - r.height, r.width, r.height};
}

/// Signal half-plane shrunk by `margin` on each side.
inline Region default_signal_region(std::size_t frame_width, std::size_t frame_height,
                                    std::size_t margin) {
  const std::size_t half = frame_width / 2;
  if (2 * margin + 4 > half || 2 * margin + 4 > frame_height) {
    throw AnalysisError(AnalysisFailure::InvalidInput, "frame too small for the analysis margin");
  }
  return {margin, margin, half - 2 * margin, frame_height - 2 * margin};
}

namespace detail {

/// Pearson coefficient of two equally sized pixel sets given by index accessors.
template <class FA, class FB>
double pearson(std::size_t n, FA a, FB b) {
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    ma += a(k);
    mb += b(k);
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double da = a(k) - ma;
    const double db = b(k) - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace detail

/// Normalized spatial autocorrelation of intensity fluctuations inside `region`.
/// Each displacement uses the overlap of R and R - xi, with fluctuations taken about the
/// overlap means. C(-xi) is copied from C(xi), which is computed on the same pixel pairs.
template <class T>
CorrelationMap autocorrelation(ImageView<T> image, const Region& region, int max_disp) {
  check_region(region, image.width(), image.height());
  if (max_disp < 0) throw AnalysisError(AnalysisFailure::InvalidInput, "negative max displacement");
  const auto d = static_cast<std::size_t>(max_disp);
  if (d >= region.width || d >= region.height ||
      (region.width - d) * (region.height - d) < 16) {
    throw AnalysisError(AnalysisFailure::InvalidInput,
                        "region overlap below 16 pixels at the largest displacement");
  }

  // Contiguous copy of the region; rows are scanned directly per displacement.
  const std::size_t rw = region.width;
  const std::size_t rh = region.height;
  std::vector<double> px(rw * rh);
  for (std::size_t j = 0; j < rh; ++j) {
    for (std::size_t i = 0; i < rw; ++i) px[j * rw + i] = image(region.x + i, region.y + j);
  }

  CorrelationMap map(max_disp, CorrelationMap::Kind::Auto);
  for (int dy = 0; dy <= max_disp; ++dy) {
    for (int dx = -max_disp; dx <= max_disp; ++dx) {
      if (dy == 0 && dx < 0) continue;
      // Pairs (p, p + xi) with p in [x0, x0 + w) x [0, h).
      const std::size_t x0 = static_cast<std::size_t>(std::max(0, -dx));
      const std::size_t w = rw - static_cast<std::size_t>(std::abs(dx));
      const std::size_t h = rh - static_cast<std::size_t>(dy);
      const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(dy) * static_cast<std::ptrdiff_t>(rw) + dx;
      double sa = 0.0;
      double sb = 0.0;
      for (std::size_t j = 0; j < h; ++j) {
        const double* a = px.data() + j * rw + x0;
        const double* b = a + shift;
        for (std::size_t i = 0; i < w; ++i) {
          sa += a[i];
          sb += b[i];
        }
      }
      const double n = static_cast<double>(w * h);
      const double ma = sa / n;
      const double mb = sb / n;
      double sab = 0.0;
      double saa = 0.0;
      double sbb = 0.0;
      for (std::size_t j = 0; j < h; ++j) {
        const double* a = px.data() + j * rw + x0;
        const double* b = a + shift;
        for (std::size_t i = 0; i < w; ++i) {
          const double da = a[i] - ma;
          const double db = b[i] - mb;
          sab += da * db;
          saa += da * da;
          sbb += db * db;
        }
      }
      double c = std::numeric_limits<double>::quiet_NaN();
      if (saa > 0.0 && sbb > 0.0) c = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
      if (dx == 0 && dy == 0 && !std::isnan(c)) c = 1.0;
      map.at(dx, dy) = c;
      map.at(-dx, -dy) = c;
    }
  }
  return map;
}

/// Correlation between a fixed region R1 and a region R2 swept over displacements
/// |d| <= max_disp about `r2_origin`. With `mirror`, R2 pixels are read in point-reflected
/// order, pairing the pixel at q with the one at -q.
template <class T>
CorrelationMap cross_correlation(ImageView<T> image, const Region& r1, const Region& r2_origin,
                                 int max_disp, bool mirror = true) {
  check_region(r1, image.width(), image.height());
  if (r2_origin.width != r1.width || r2_origin.height != r1.height) {
    throw AnalysisError(AnalysisFailure::InvalidInput, "R1 and R2 must have the same shape");
  }
  CorrelationMap map(max_disp, CorrelationMap::Kind::Cross);
  const std::size_t w = r1.width;
  const std::size_t n = r1.area();
  for (int dy = -max_disp; dy <= max_disp; ++dy) {
    for (int dx = -max_disp; dx <= max_disp; ++dx) {
      const long x2 = static_cast<long>(r2_origin.x) + dx;
      const long y2 = static_cast<long>(r2_origin.y) + dy;
      if (x2 < 0 || y2 < 0) {
        throw AnalysisError(AnalysisFailure::InvalidInput, "swept R2 leaves the frame");
      }
      const Region r2{static_cast<std::size_t>(x2), static_cast<std::size_t>(y2), r1.width, r1.height};
      if (!fits_inside(r2, image.width(), image.height())) {
        throw AnalysisError(AnalysisFailure::InvalidInput, "swept R2 leaves the frame");
      }
      auto first = [&](std::size_t k) { return image(r1.x + k % w, r1.y + k / w); };
      auto second = [&](std::size_t k) {
        std::size_t i = k % w;
        std::size_t j = k / w;
        if (mirror) {
          i = r2.width - 1 - i;
          j = r2.height - 1 - j;
        }
        return image(r2.x + i, r2.y + j);
      };
      map.at(dx, dy) = detail::pearson(n, first, second);
    }
  }
  return map;
}

struct Displacement {
  int dx = 0;
  int dy = 0;
  friend bool operator==(Displacement, Displacement) = default;
};

/// Displacement of the largest defined entry.
inline Displacement argmax(const CorrelationMap& map) {
  Displacement best;
  double v = -std::numeric_limits<double>::infinity();
  for (int dy = -map.max_disp; dy <= map.max_disp; ++dy) {
    for (int dx = -map.max_disp; dx <= map.max_disp; ++dx) {
      if (map.defined(dx, dy) && map.at(dx, dy) > v) {
        v = map.at(dx, dy);
        best = {dx, dy};
      }
    }
  }
  if (!std::isfinite(v)) throw AnalysisError(AnalysisFailure::DegenerateRegion, "map has no defined entry");
  return best;
}

}  // namespace pdcspeckle
