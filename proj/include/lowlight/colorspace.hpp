#pragma once

#include "lowlight/image.hpp"

namespace lowlight {

/// Hue in [0,1) (angle / 360), saturation and value in [0,1].
struct HsvDecomposition {
  Plane hue;
  Plane saturation;
  Plane value;

  std::size_t height() const noexcept { return value.height(); }
  std::size_t width() const noexcept { return value.width(); }
};

struct Hsv {
  double h, s, v;
};

struct Rgb {
  double r, g, b;
};

/// Hexcone conversion. v = max(r,g,b); achromatic pixels get hue 0.
Hsv rgb_to_hsv(Rgb rgb) noexcept;
/// Inverse hexcone conversion; result clamped to [0,1].
Rgb hsv_to_rgb(Hsv hsv) noexcept;

/// Requires a 3-channel image (ArgumentError otherwise).
HsvDecomposition rgb_to_hsv(const PlanarImage& img);
PlanarImage hsv_to_rgb(const HsvDecomposition& hsv);

/// Original hue and saturation with a replacement value plane.
PlanarImage recombine(const HsvDecomposition& original, const ValuePlane& enhanced_value);

}  // namespace lowlight
