#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace pdcspeckle {

/// Row-major 2-D array. `(x, y)` is column `x` of row `y`.
template <class T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t x, std::size_t y) {
    assert(x < width_ && y < height_);
    return data_[y * width_ + x];
  }
  const T& operator()(std::size_t x, std::size_t y) const {
    assert(x < width_ && y < height_);
    return data_[y * width_ + x];
  }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

/// Non-owning read-only view, so analysis code accepts counts and intensities alike.
template <class T>
class ImageView {
 public:
  ImageView(std::span<const T> data, std::size_t width, std::size_t height)
      : data_(data), width_(width), height_(height) {
    assert(data.size() == width * height);
  }
  ImageView(const Image<T>& image)  // NOLINT(google-explicit-constructor)
      : ImageView(image.pixels(), image.width(), image.height()) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  double operator()(std::size_t x, std::size_t y) const {
    return static_cast<double>(data_[y * width_ + x]);
  }

 private:
  std::span<const T> data_;
  std::size_t width_;
  std::size_t height_;
};

}  // namespace pdcspeckle
