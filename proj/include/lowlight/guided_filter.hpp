#pragma once

#include <cstddef>

#include "lowlight/image.hpp"

namespace lowlight {

struct GuidedFilterParams {
  std::size_t radius = 1;
  double eps = 1e-2;

  void validate() const;
  friend bool operator==(const GuidedFilterParams&, const GuidedFilterParams&) = default;
};

/// Mean over the (2r+1)^2 window, truncated at the borders and normalized by
/// the number of pixels actually covered. Output is not clamped.
/// Throws ArgumentError when r >= max(H, W).
Plane box_filter(const Plane& plane, std::size_t radius);

/// Joint upsampling: fit signal ~ a * guide + b in every low-resolution
/// window, smooth (a, b), bilinearly resize them to the full-resolution
/// guide and evaluate a * guide + b there, clamped to [0,1].
ValuePlane guided_upsample(const Plane& lowres_signal, const Plane& lowres_guide,
                           const Plane& fullres_guide, const GuidedFilterParams& params);

/// The unclamped linear model, exposed for tests.
Plane guided_upsample_unclamped(const Plane& lowres_signal, const Plane& lowres_guide,
                                const Plane& fullres_guide, const GuidedFilterParams& params);

}  // namespace lowlight
