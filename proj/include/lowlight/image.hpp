#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lowlight {

/// Single-channel row-major raster of doubles.
///
/// Used both for bounded [0,1] value planes (the V channel, illumination,
/// enhanced value) and for unbounded intermediates such as guided-filter
/// coefficients. Operations that produce value planes document the bound.
class Plane {
 public:
  Plane() = default;
  Plane(std::size_t height, std::size_t width, double fill = 0.0);
  Plane(std::size_t height, std::size_t width, std::vector<double> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(std::size_t y, std::size_t x) noexcept { return data_[y * width_ + x]; }
  double at(std::size_t y, std::size_t x) const noexcept { return data_[y * width_ + x]; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const Plane& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  /// True when every sample lies in [lo, hi].
  bool within(double lo, double hi) const noexcept;

  double mean() const noexcept;

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// The V plane of an image and every plane derived from it that must stay in [0,1].
using ValuePlane = Plane;

/// H x W x C raster (C = 1 or 3), interleaved row-major: index (y * W + x) * C + c.
/// Samples are kept in [0,1].
class PlanarImage {
 public:
  PlanarImage() = default;
  PlanarImage(std::size_t height, std::size_t width, std::size_t channels);
  /// Throws ArgumentError if the data length or any sample is out of contract.
  PlanarImage(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return height_ * width_; }

  double& at(std::size_t y, std::size_t x, std::size_t c) noexcept {
    return data_[(y * width_ + x) * channels_ + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c) const noexcept {
    return data_[(y * width_ + x) * channels_ + c];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Plane channel(std::size_t c) const;
  void set_channel(std::size_t c, const Plane& plane);

  /// Clamp every sample into [0,1]; NaN becomes 0.
  void clamp_unit() noexcept;

  friend bool operator==(const PlanarImage&, const PlanarImage&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

/// Side length of the square neighbourhood that conditions each pixel. Must be odd.
class ContextWindowSpec {
 public:
  explicit ContextWindowSpec(int side = 7);

  int side() const noexcept { return side_; }
  int margin() const noexcept { return (side_ - 1) / 2; }
  std::size_t area() const noexcept { return static_cast<std::size_t>(side_) * side_; }
  std::size_t center_index() const noexcept { return area() / 2; }

  friend bool operator==(const ContextWindowSpec&, const ContextWindowSpec&) = default;

 private:
  int side_;
};

/// Dense row-major matrix used for design matrices and feature tables.
template <typename T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c) {}

  T& operator()(std::size_t r, std::size_t c) noexcept { return values[r * cols + c]; }
  T operator()(std::size_t r, std::size_t c) const noexcept { return values[r * cols + c]; }
  std::span<T> row(std::size_t r) noexcept { return {values.data() + r * cols, cols}; }
  std::span<const T> row(std::size_t r) const noexcept { return {values.data() + r * cols, cols}; }
};

/// Bilinear resampling with half-pixel-centred sample positions
/// (src = (dst + 0.5) * in / out - 0.5, clamped to the edge).
Plane resize_bilinear(const Plane& plane, std::size_t out_h, std::size_t out_w);
PlanarImage resize_bilinear(const PlanarImage& img, std::size_t out_h, std::size_t out_w);

/// Mirror the border without repeating the edge sample (reflect-101):
/// row [a,b,c] with margin 1 becomes [b,a,b,c,b]. Requires margin < min(H, W).
Plane reflect_pad(const Plane& plane, std::size_t margin);

/// One row per pixel (row-major pixel order) holding the flattened side x side
/// neighbourhood, taken from the reflect-101 padded plane.
Matrix<double> extract_context(const Plane& plane, ContextWindowSpec spec);

}  // namespace lowlight
