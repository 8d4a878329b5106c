#include "lowlight/objective.hpp"

#include <cmath>
#include <string>

#include "lowlight/errors.hpp"

namespace lowlight {

namespace {

double sign(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_same_shape(const Plane& a, const Plane& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ArgumentError(std::string(what) + ": plane dimensions differ (" +
                        std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                        std::to_string(b.height()) + "x" + std::to_string(b.width()) + ")");
  }
}

}  // namespace

void LossWeights::validate() const {
  if (!(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0 && delta >= 0.0)) {
    throw ArgumentError("loss weights must be non-negative");
  }
}

void ExposureSpec::validate() const {
  if (!(target_level > 0.0 && target_level <= 1.0)) {
    throw ArgumentError("exposure target level must lie in (0, 1]");
  }
  if (region_side == 0) throw ArgumentError("exposure region side must be positive");
}

bool LossReport::finite() const noexcept {
  return std::isfinite(fidelity) && std::isfinite(smoothness) && std::isfinite(exposure) &&
         std::isfinite(sparsity) && std::isfinite(total);
}

LossTerm fidelity_loss(const Plane& illumination, const Plane& observed) {
  require_same_shape(illumination, observed, "fidelity loss");
  const double m = static_cast<double>(illumination.size());
  LossTerm out{0.0, Plane(illumination.height(), illumination.width())};
  double sum = 0.0;
  for (std::size_t i = 0; i < illumination.size(); ++i) {
    const double d = illumination[i] - observed[i];
    sum += d * d;
    out.grad[i] = 2.0 * d / m;
  }
  out.value = sum / m;
  return out;
}

LossTerm smoothness_loss(const Plane& x) {
  const std::size_t h = x.height();
  const std::size_t w = x.width();
  if (h < 2 || w < 2) throw ArgumentError("smoothness loss needs a plane of at least 2x2");
  double vert_sq = 0.0;
  double horiz_sq = 0.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t c = 0; c < w; ++c) {
      if (y + 1 < h) {
        const double d = x.at(y + 1, c) - x.at(y, c);
        vert_sq += d * d;
      }
      if (c + 1 < w) {
        const double d = x.at(y, c + 1) - x.at(y, c);
        horiz_sq += d * d;
      }
    }
  }
  const double vert = std::sqrt(vert_sq);
  const double horiz = std::sqrt(horiz_sq);
  const double s = vert + horiz;
  LossTerm out{s * s, Plane(h, w)};
  // d/dx (a + b)^2 = 2 (a + b) (da/dx + db/dx), da/dx = (1/a) sum d * dd/dx.
  // A zero norm means every difference in it is zero, so it contributes nothing.
  const double kv = vert > 0.0 ? 2.0 * s / vert : 0.0;
  const double kh = horiz > 0.0 ? 2.0 * s / horiz : 0.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t c = 0; c < w; ++c) {
      if (y + 1 < h) {
        const double g = kv * (x.at(y + 1, c) - x.at(y, c));
        out.grad.at(y + 1, c) += g;
        out.grad.at(y, c) -= g;
      }
      if (c + 1 < w) {
        const double g = kh * (x.at(y, c + 1) - x.at(y, c));
        out.grad.at(y, c + 1) += g;
        out.grad.at(y, c) -= g;
      }
    }
  }
  return out;
}

LossTerm exposure_loss(const Plane& x, const ExposureSpec& spec) {
  spec.validate();
  const std::size_t side = spec.region_side;
  if (x.empty() || x.height() % side != 0 || x.width() % side != 0) {
    throw ArgumentError("plane " + std::to_string(x.height()) + "x" + std::to_string(x.width()) +
                        " is not divisible into " + std::to_string(side) + "x" +
                        std::to_string(side) + " exposure regions");
  }
  const std::size_t by = x.height() / side;
  const std::size_t bx = x.width() / side;
  const double regions = static_cast<double>(by * bx);
  const double area = static_cast<double>(side * side);
  LossTerm out{0.0, Plane(x.height(), x.width())};
  double sum = 0.0;
  for (std::size_t ry = 0; ry < by; ++ry) {
    for (std::size_t rx = 0; rx < bx; ++rx) {
      double block = 0.0;
      for (std::size_t y = ry * side; y < (ry + 1) * side; ++y) {
        for (std::size_t c = rx * side; c < (rx + 1) * side; ++c) block += x.at(y, c);
      }
      const double mean = block / area;
      if (!(mean > 0.0)) {
        throw DomainError("exposure region (" + std::to_string(ry) + "," + std::to_string(rx) +
                          ") has non-positive mean");
      }
      const double root = std::sqrt(mean);
      const double dist = root - spec.target_level;
      sum += std::abs(dist);
      const double g = sign(dist) / (regions * 2.0 * root * area);
      for (std::size_t y = ry * side; y < (ry + 1) * side; ++y) {
        for (std::size_t c = rx * side; c < (rx + 1) * side; ++c) out.grad.at(y, c) = g;
      }
    }
  }
  out.value = sum / regions;
  return out;
}

LossTerm sparsity_loss(const Plane& z) {
  LossTerm out{0.0, Plane(z.height(), z.width())};
  if (z.empty()) return out;
  const double m = static_cast<double>(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    sum += std::abs(z[i]);
    out.grad[i] = sign(z[i]) / m;
  }
  out.value = sum / m;
  return out;
}

TotalLoss total_loss(const Plane& illumination, const Plane& observed, const Plane& enhanced,
                     const LossWeights& weights, const ExposureSpec& exposure) {
  weights.validate();
  require_same_shape(illumination, observed, "total loss");
  require_same_shape(illumination, enhanced, "total loss");
  const LossTerm fid = fidelity_loss(illumination, observed);
  const LossTerm smooth = smoothness_loss(illumination);
  const LossTerm expo = exposure_loss(illumination, exposure);
  const LossTerm sparse = sparsity_loss(enhanced);

  TotalLoss out;
  out.report.fidelity = fid.value;
  out.report.smoothness = smooth.value;
  out.report.exposure = expo.value;
  out.report.sparsity = sparse.value;
  out.report.total = weights.alpha * fid.value + weights.beta * smooth.value +
                     weights.gamma * expo.value + weights.delta * sparse.value;
  out.grad = Plane(illumination.height(), illumination.width());
  for (std::size_t i = 0; i < illumination.size(); ++i) {
    const double x = illumination[i];
    const double dz_dx = -observed[i] / (x * x);
    out.grad[i] = weights.alpha * fid.grad[i] + weights.beta * smooth.grad[i] +
                  weights.gamma * expo.grad[i] + weights.delta * sparse.grad[i] * dz_dx;
  }
  return out;
}

}  // namespace lowlight
