#pragma once

#include <limits>
#include <string>

#include "lowlight/image.hpp"

namespace lowlight {

struct MetricReport {
  double psnr_db = 0.0;  // +infinity for identical images
  double ssim = 0.0;
};

/// 10 log10(1 / MSE) with peak 1; +infinity when MSE == 0.
double psnr(const PlanarImage& a, const PlanarImage& b);

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// dynamic range 1. Mean over window positions fully inside the image,
/// averaged over channels. Both sides must be at least 11 pixels.
double ssim(const PlanarImage& a, const PlanarImage& b);

MetricReport compare(const PlanarImage& a, const PlanarImage& b);

/// Decibels as text; +infinity is written as "inf".
std::string format_psnr(double db);
/// Inverse of format_psnr (accepts "inf").
double parse_psnr(const std::string& text);

}  // namespace lowlight
