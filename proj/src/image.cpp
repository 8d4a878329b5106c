#include "lowlight/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lowlight/errors.hpp"

namespace lowlight {

Plane::Plane(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), data_(height * width, fill) {}

Plane::Plane(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (data_.size() != height_ * width_) {
    throw ArgumentError("plane data length " + std::to_string(data_.size()) + " != " +
                        std::to_string(height_) + "x" + std::to_string(width_));
  }
}

bool Plane::within(double lo, double hi) const noexcept {
  return std::all_of(data_.begin(), data_.end(), [&](double v) { return v >= lo && v <= hi; });
}

double Plane::mean() const noexcept {
  if (data_.empty()) return 0.0;
  return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}

PlanarImage::PlanarImage(std::size_t height, std::size_t width, std::size_t channels)
    : height_(height), width_(width), channels_(channels), data_(height * width * channels, 0.0) {
  if (channels != 1 && channels != 3) throw ArgumentError("image must have 1 or 3 channels");
}

PlanarImage::PlanarImage(std::size_t height, std::size_t width, std::size_t channels,
                         std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (channels != 1 && channels != 3) throw ArgumentError("image must have 1 or 3 channels");
  if (data_.size() != height * width * channels) {
    throw ArgumentError("image data length " + std::to_string(data_.size()) +
                        " does not match " + std::to_string(height) + "x" +
                        std::to_string(width) + "x" + std::to_string(channels));
  }
  for (double s : data_) {
    if (!(s >= 0.0 && s <= 1.0)) throw ArgumentError("image sample outside [0,1]");
  }
}

Plane PlanarImage::channel(std::size_t c) const {
  if (c >= channels_) throw ArgumentError("channel index out of range");
  Plane out(height_, width_);
  for (std::size_t i = 0; i < pixel_count(); ++i) out[i] = data_[i * channels_ + c];
  return out;
}

void PlanarImage::set_channel(std::size_t c, const Plane& plane) {
  if (c >= channels_) throw ArgumentError("channel index out of range");
  if (plane.height() != height_ || plane.width() != width_) {
    throw ArgumentError("channel plane dimensions do not match image");
  }
  for (std::size_t i = 0; i < pixel_count(); ++i) data_[i * channels_ + c] = plane[i];
}

void PlanarImage::clamp_unit() noexcept {
  for (double& s : data_) s = std::isnan(s) ? 0.0 : std::clamp(s, 0.0, 1.0);
}

ContextWindowSpec::ContextWindowSpec(int side) : side_(side) {
  if (side < 1 || side % 2 == 0) {
    throw ArgumentError("context window side must be a positive odd integer, got " +
                        std::to_string(side));
  }
}

namespace {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

std::vector<Tap> bilinear_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  const double last = static_cast<double>(in - 1);
  for (std::size_t d = 0; d < out; ++d) {
    double src = (static_cast<double>(d) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, last);
    const auto lo = static_cast<std::size_t>(std::floor(src));
    const std::size_t hi = std::min(lo + 1, in - 1);
    taps[d] = {lo, hi, src - static_cast<double>(lo)};
  }
  return taps;
}

// Interleaved resampler shared by planes and images; `channels` samples per pixel.
std::vector<double> resample(std::span<const double> src, std::size_t in_h, std::size_t in_w,
                             std::size_t channels, std::size_t out_h, std::size_t out_w) {
  std::vector<double> dst(out_h * out_w * channels);
  if (in_h == out_h && in_w == out_w) {
    std::copy(src.begin(), src.end(), dst.begin());
    return dst;
  }
  const auto ty = bilinear_taps(in_h, out_h);
  const auto tx = bilinear_taps(in_w, out_w);
  for (std::size_t y = 0; y < out_h; ++y) {
    const Tap& vy = ty[y];
    const double* r0 = src.data() + vy.lo * in_w * channels;
    const double* r1 = src.data() + vy.hi * in_w * channels;
    double* out = dst.data() + y * out_w * channels;
    for (std::size_t x = 0; x < out_w; ++x) {
      const Tap& vx = tx[x];
      for (std::size_t c = 0; c < channels; ++c) {
        const double a = r0[vx.lo * channels + c];
        const double b = r0[vx.hi * channels + c];
        const double p = r1[vx.lo * channels + c];
        const double q = r1[vx.hi * channels + c];
        const double top = a + (b - a) * vx.frac;
        const double bottom = p + (q - p) * vx.frac;
        out[x * channels + c] = top + (bottom - top) * vy.frac;
      }
    }
  }
  return dst;
}

}  // namespace

Plane resize_bilinear(const Plane& plane, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw ArgumentError("resize target must be at least 1x1");
  if (plane.empty()) throw ArgumentError("cannot resize an empty plane");
  return Plane(out_h, out_w,
               resample(plane.data(), plane.height(), plane.width(), 1, out_h, out_w));
}

PlanarImage resize_bilinear(const PlanarImage& img, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw ArgumentError("resize target must be at least 1x1");
  if (img.pixel_count() == 0) throw ArgumentError("cannot resize an empty image");
  auto data = resample(img.data(), img.height(), img.width(), img.channels(), out_h, out_w);
  // Convex combinations of [0,1] samples stay in [0,1]; clamp only guards rounding.
  PlanarImage out(out_h, out_w, img.channels());
  std::copy(data.begin(), data.end(), out.data().begin());
  out.clamp_unit();
  return out;
}

namespace {

std::size_t reflect101(std::ptrdiff_t i, std::size_t n) {
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  if (i < 0) i = -i;
  if (i > last) i = 2 * last - i;
  return static_cast<std::size_t>(i);
}

}  // namespace

Plane reflect_pad(const Plane& plane, std::size_t margin) {
  if (margin == 0) return plane;
  if (margin >= std::min(plane.height(), plane.width())) {
    throw ArgumentError("reflection margin " + std::to_string(margin) +
                        " must be smaller than both plane dimensions");
  }
  const std::size_t h = plane.height() + 2 * margin;
  const std::size_t w = plane.width() + 2 * margin;
  const auto m = static_cast<std::ptrdiff_t>(margin);
  Plane out(h, w);
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t sy = reflect101(static_cast<std::ptrdiff_t>(y) - m, plane.height());
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t sx = reflect101(static_cast<std::ptrdiff_t>(x) - m, plane.width());
      out.at(y, x) = plane.at(sy, sx);
    }
  }
  return out;
}

Matrix<double> extract_context(const Plane& plane, ContextWindowSpec spec) {
  const auto side = static_cast<std::size_t>(spec.side());
  const Plane padded = reflect_pad(plane, static_cast<std::size_t>(spec.margin()));
  const double* base = padded.data().data();
  Matrix<double> rows(plane.size(), spec.area());
  for (std::size_t y = 0; y < plane.height(); ++y) {
    for (std::size_t x = 0; x < plane.width(); ++x) {
      double* dst = rows.row(y * plane.width() + x).data();
      for (std::size_t dy = 0; dy < side; ++dy) {
        const double* src = base + (y + dy) * padded.width() + x;
        std::copy(src, src + side, dst + dy * side);
      }
    }
  }
  return rows;
}

}  // namespace lowlight
