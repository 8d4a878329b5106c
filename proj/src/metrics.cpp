#include "lowlight/metrics.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "lowlight/errors.hpp"

namespace lowlight {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void require_same_shape(const PlanarImage& a, const PlanarImage& b) {
  if (a.height() != b.height() || a.width() != b.width() || a.channels() != b.channels()) {
    throw ArgumentError("metric inputs must have identical dimensions and channel counts");
  }
}

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> taps{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    taps[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable "valid" Gaussian filtering: output (h-10) x (w-10).
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t h, std::size_t w,
                                 const std::array<double, kWindow>& taps) {
  const std::size_t ow = w - kWindow + 1;
  const std::size_t oh = h - kWindow + 1;
  std::vector<double> tmp(h * ow);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * src[y * w + x + k];
      tmp[y * ow + x] = acc;
    }
  }
  std::vector<double> out(oh * ow);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * tmp[(y + k) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double psnr(const PlanarImage& a, const PlanarImage& b) {
  require_same_shape(a, b);
  const auto da = a.data();
  const auto db = b.data();
  if (da.empty()) throw ArgumentError("psnr of empty images");
  double sum = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(da.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const PlanarImage& a, const PlanarImage& b) {
  require_same_shape(a, b);
  const std::size_t h = a.height();
  const std::size_t w = a.width();
  if (h < static_cast<std::size_t>(kWindow) || w < static_cast<std::size_t>(kWindow)) {
    throw ArgumentError("SSIM needs images of at least 11x11 pixels");
  }
  const auto taps = gaussian_taps();
  double total = 0.0;
  for (std::size_t c = 0; c < a.channels(); ++c) {
    std::vector<double> x(h * w), y(h * w), xx(h * w), yy(h * w), xy(h * w);
    for (std::size_t i = 0; i < h * w; ++i) {
      x[i] = a.data()[i * a.channels() + c];
      y[i] = b.data()[i * b.channels() + c];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, h, w, taps);
    const auto my = filter_valid(y, h, w, taps);
    const auto sxx = filter_valid(xx, h, w, taps);
    const auto syy = filter_valid(yy, h, w, taps);
    const auto sxy = filter_valid(xy, h, w, taps);
    double sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mx[i] * my[i];
      const double num = (2.0 * mx[i] * my[i] + kC1) * (2.0 * cov + kC2);
      const double den = (mx[i] * mx[i] + my[i] * my[i] + kC1) * (vx + vy + kC2);
      sum += num / den;
    }
    total += sum / static_cast<double>(mx.size());
  }
  return total / static_cast<double>(a.channels());
}

MetricReport compare(const PlanarImage& a, const PlanarImage& b) { return {psnr(a, b), ssim(a, b)}; }

std::string format_psnr(double db) {
  if (std::isinf(db) && db > 0) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", db);
  return buf;
}

double parse_psnr(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  return std::stod(text);
}

}  // namespace lowlight
