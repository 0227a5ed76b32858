#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include "error.hpp"

namespace pdcspeckle {

namespace detail {
// FFTW planning is not thread-safe; execution with the new-array interface is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Unitary 2-D DFT on an n x n row-major grid (forward sign -1, scaled by 1/n).
class UnitaryFft2d {
 public:
  explicit UnitaryFft2d(std::size_t n) : n_(n) {
    if (n == 0) throw ConfigError("transform size must be positive", "synthesis.grid");
    std::vector<std::complex<double>> scratch(n * n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const int in = static_cast<int>(n);
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_ = fftw_plan_dft_2d(in, in, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward_ = fftw_plan_dft_2d(in, in, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }

  UnitaryFft2d(const UnitaryFft2d&) = delete;
  UnitaryFft2d& operator=(const UnitaryFft2d&) = delete;

  ~UnitaryFft2d() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  std::size_t size() const noexcept { return n_; }

  void forward(std::span<std::complex<double>> data) const { run(forward_, data); }
  void backward(std::span<std::complex<double>> data) const { run(backward_, data); }

 private:
  void run(fftw_plan plan, std::span<std::complex<double>> data) const {
    if (data.size() != n_ * n_) throw ConfigError("transform buffer has the wrong size");
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : data) v *= scale;
  }

  std::size_t n_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace pdcspeckle
