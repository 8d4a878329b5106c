#include "lowlight/guided_filter.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "lowlight/errors.hpp"

namespace lowlight {

void GuidedFilterParams::validate() const {
  if (radius < 1) throw ArgumentError("guided filter radius must be at least 1");
  if (!(eps > 0.0)) throw ArgumentError("guided filter eps must be positive");
}

Plane box_filter(const Plane& plane, std::size_t radius) {
  const std::size_t h = plane.height();
  const std::size_t w = plane.width();
  if (plane.empty()) throw ArgumentError("box filter on an empty plane");
  if (radius >= std::max(h, w)) {
    throw ArgumentError("box filter radius " + std::to_string(radius) + " too large for " +
                        std::to_string(h) + "x" + std::to_string(w) + " plane");
  }
  // Summed-area table with a zero first row and column.
  std::vector<double> sat((h + 1) * (w + 1), 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    double row = 0.0;
    for (std::size_t x = 0; x < w; ++x) {
      row += plane.at(y, x);
      sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + row;
    }
  }
  Plane out(h, w);
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t y0 = y >= radius ? y - radius : 0;
    const std::size_t y1 = std::min(h, y + radius + 1);
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t x0 = x >= radius ? x - radius : 0;
      const std::size_t x1 = std::min(w, x + radius + 1);
      const double sum = sat[y1 * (w + 1) + x1] - sat[y0 * (w + 1) + x1] -
                         sat[y1 * (w + 1) + x0] + sat[y0 * (w + 1) + x0];
      out.at(y, x) = sum / static_cast<double>((y1 - y0) * (x1 - x0));
    }
  }
  return out;
}

Plane guided_upsample_unclamped(const Plane& signal, const Plane& guide, const Plane& full_guide,
                                const GuidedFilterParams& params) {
  params.validate();
  if (!signal.same_shape(guide)) {
    throw ArgumentError("guided filter: low-resolution signal and guide differ in size");
  }
  if (full_guide.empty() || signal.empty()) throw ArgumentError("guided filter: empty plane");
  const std::size_t r = params.radius;
  const std::size_t n = signal.size();

  Plane gg(guide.height(), guide.width());
  Plane gs(guide.height(), guide.width());
  for (std::size_t i = 0; i < n; ++i) {
    gg[i] = guide[i] * guide[i];
    gs[i] = guide[i] * signal[i];
  }
  const Plane mean_g = box_filter(guide, r);
  const Plane mean_s = box_filter(signal, r);
  const Plane corr_gg = box_filter(gg, r);
  const Plane corr_gs = box_filter(gs, r);

  Plane a(guide.height(), guide.width());
  Plane b(guide.height(), guide.width());
  for (std::size_t i = 0; i < n; ++i) {
    const double var = corr_gg[i] - mean_g[i] * mean_g[i];
    const double cov = corr_gs[i] - mean_g[i] * mean_s[i];
    a[i] = cov / (var + params.eps);
    b[i] = mean_s[i] - a[i] * mean_g[i];
  }
  const Plane a_full = resize_bilinear(box_filter(a, r), full_guide.height(), full_guide.width());
  const Plane b_full = resize_bilinear(box_filter(b, r), full_guide.height(), full_guide.width());

  Plane out(full_guide.height(), full_guide.width());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a_full[i] * full_guide[i] + b_full[i];
  return out;
}

ValuePlane guided_upsample(const Plane& signal, const Plane& guide, const Plane& full_guide,
                           const GuidedFilterParams& params) {
  Plane out = guided_upsample_unclamped(signal, guide, full_guide, params);
  for (double& v : out.data()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

}  // namespace lowlight
