#include "lowlight/colorspace.hpp"

#include <algorithm>
#include <cmath>

#include "lowlight/errors.hpp"

namespace lowlight {

Hsv rgb_to_hsv(Rgb p) noexcept {
  const double v = std::max({p.r, p.g, p.b});
  const double chroma = v - std::min({p.r, p.g, p.b});
  if (chroma <= 0.0) return {0.0, 0.0, v};
  const double s = chroma / v;
  double h;
  if (v == p.r) {
    h = (p.g - p.b) / chroma;
    if (h < 0.0) h += 6.0;
  } else if (v == p.g) {
    h = (p.b - p.r) / chroma + 2.0;
  } else {
    h = (p.r - p.g) / chroma + 4.0;
  }
  h /= 6.0;
  if (h >= 1.0) h -= 1.0;
  return {h, s, v};
}

Rgb hsv_to_rgb(Hsv p) noexcept {
  const double v = p.v;
  if (p.s <= 0.0) return {v, v, v};
  const double h6 = (p.h - std::floor(p.h)) * 6.0;
  const double sector = std::floor(h6);
  const double f = h6 - sector;
  const double lo = v * (1.0 - p.s);
  const double falling = v * (1.0 - p.s * f);
  const double rising = v * (1.0 - p.s * (1.0 - f));
  Rgb out;
  switch (static_cast<int>(sector) % 6) {
    case 0: out = {v, rising, lo}; break;
    case 1: out = {falling, v, lo}; break;
    case 2: out = {lo, v, rising}; break;
    case 3: out = {lo, falling, v}; break;
    case 4: out = {rising, lo, v}; break;
    default: out = {v, lo, falling}; break;
  }
  out.r = std::clamp(out.r, 0.0, 1.0);
  out.g = std::clamp(out.g, 0.0, 1.0);
  out.b = std::clamp(out.b, 0.0, 1.0);
  return out;
}

HsvDecomposition rgb_to_hsv(const PlanarImage& img) {
  if (img.channels() != 3) throw ArgumentError("rgb_to_hsv requires a 3-channel image");
  const std::size_t h = img.height();
  const std::size_t w = img.width();
  HsvDecomposition out{Plane(h, w), Plane(h, w), Plane(h, w)};
  const auto src = img.data();
  for (std::size_t i = 0; i < h * w; ++i) {
    const Hsv p = rgb_to_hsv(Rgb{src[3 * i], src[3 * i + 1], src[3 * i + 2]});
    out.hue[i] = p.h;
    out.saturation[i] = p.s;
    out.value[i] = p.v;
  }
  return out;
}

PlanarImage hsv_to_rgb(const HsvDecomposition& hsv) {
  if (!hsv.hue.same_shape(hsv.value) || !hsv.saturation.same_shape(hsv.value)) {
    throw ArgumentError("HSV planes must share dimensions");
  }
  PlanarImage out(hsv.height(), hsv.width(), 3);
  auto dst = out.data();
  for (std::size_t i = 0; i < hsv.value.size(); ++i) {
    const Rgb p = hsv_to_rgb(Hsv{hsv.hue[i], hsv.saturation[i], hsv.value[i]});
    dst[3 * i] = p.r;
    dst[3 * i + 1] = p.g;
    dst[3 * i + 2] = p.b;
  }
  return out;
}

PlanarImage recombine(const HsvDecomposition& original, const ValuePlane& enhanced_value) {
  if (!original.value.same_shape(enhanced_value)) {
    throw ArgumentError("enhanced value plane does not match the decomposition's dimensions");
  }
  PlanarImage out(original.height(), original.width(), 3);
  auto dst = out.data();
  for (std::size_t i = 0; i < enhanced_value.size(); ++i) {
    const Rgb p =
        hsv_to_rgb(Hsv{original.hue[i], original.saturation[i], enhanced_value[i]});
    dst[3 * i] = p.r;
    dst[3 * i + 1] = p.g;
    dst[3 * i + 2] = p.b;
  }
  return out;
}

}  // namespace lowlight
