// acceptance N: runs one end-to-end criterion and prints a single
// "criterion N: PASS|FAIL ..." line. Exit status is 0 on PASS, 1 on FAIL.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "lowlight/codec.hpp"
#include "lowlight/colorspace.hpp"
#include "lowlight/guided_filter.hpp"
#include "lowlight/metrics.hpp"
#include "lowlight/pipeline.hpp"
#include "lowlight/serialization.hpp"
#include "test_support.hpp"

using namespace lowlight;
namespace lt = lowlight::testing;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

const std::vector<std::string> kPhotos{"astronaut", "chelsea", "coffee", "immunohistochemistry", "rocket"};

PlanarImage photo(const std::string& name) { return read_image(lt::photo_dir() / (name + ".png")); }

/// Darkened by V' = 0.2 V and quantized back to 8 bits, as if saved to disk.
PlanarImage dark_photo(const std::string& name) {
  PlanarImage d = lt::darken(photo(name), 0.2);
  for (double& v : d.data()) v = quantize_sample(v) / 255.0;
  return d;
}

// The sweeps and determinism checks run at a reduced working resolution; every
// other setting is the default.
EnhancementConfig reduced_config() {
  EnhancementConfig cfg;
  cfg.working_size = 128;
  return cfg;
}

// ---------------------------------------------------------------------------

Verdict gradient_fidelity() {
  const auto t0 = Clock::now();
  nn::NetworkShape shape;
  shape.context_dim = 9;
  shape.hidden = 8;
  shape.branch_out = 4;
  shape.head_hidden = 8;
  lt::ObjectiveSetup setup;
  setup.observed = lt::random_plane(8, 8, 11, 0.05, 0.6);
  setup.window = ContextWindowSpec(3);
  setup.exposure.region_side = 4;  // 16 does not divide 8
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto rep = lt::check_objective_gradient(nn::init_parameters<double>(shape, seed), setup);
    worst = std::max(worst, rep.max_rel_error);
    checked += rep.checked;
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 10.0,
          fmt("max relative error %.3g over %zu parameter gradients (limit 1e-4), %.2f s", worst, checked, secs)};
}

Verdict colorspace_roundtrip() {
  const auto t0 = Clock::now();
  const PlanarImage rgb = lt::random_image(1000, 1000, 3, 21);
  const PlanarImage back = hsv_to_rgb(rgb_to_hsv(rgb));
  const double err = lt::max_abs_diff(rgb.data(), back.data());

  const PlanarImage img8 = lt::random_8bit_image(97, 131, 3, 22);
  const auto bytes = encode_image(img8, ImageFormat::png);
  const PlanarImage decoded = decode_image(bytes);
  const bool exact = decoded.height() == img8.height() && decoded.width() == img8.width() &&
                     decoded.channels() == 3 && encode_image(decoded, ImageFormat::png) == bytes &&
                     lt::max_abs_diff(decoded.data(), img8.data()) == 0.0;
  const double secs = seconds_since(t0);
  return {err < 1e-6 && exact && secs < 5.0,
          fmt("max HSV roundtrip error %.3g over 1e6 pixels, 8-bit PNG roundtrip %s, %.2f s", err,
              exact ? "bit-exact" : "NOT exact", secs)};
}

Plane brute_box(const Plane& p, long r) {
  const long h = static_cast<long>(p.height()), w = static_cast<long>(p.width());
  Plane out(p.height(), p.width());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double s = 0.0;
      long n = 0;
      for (long yy = std::max(0L, y - r); yy <= std::min(h - 1, y + r); ++yy) {
        for (long xx = std::max(0L, x - r); xx <= std::min(w - 1, x + r); ++xx) {
          s += p.at(yy, xx);
          ++n;
        }
      }
      out.at(y, x) = s / static_cast<double>(n);
    }
  }
  return out;
}

Verdict guided_oracles() {
  double self_err = 0.0;
  for (std::size_t r : {1u, 2u, 4u}) {
    const Plane g = lt::random_plane(32, 32, 30 + r);
    const Plane q = guided_upsample_unclamped(g, g, g, GuidedFilterParams{r, 1e-12});
    for (std::size_t y = 2 * r; y < 32 - 2 * r; ++y) {
      for (std::size_t x = 2 * r; x < 32 - 2 * r; ++x) self_err = std::max(self_err, std::abs(q.at(y, x) - g.at(y, x)));
    }
  }
  // A constant guide has zero variance, so a = 0 and the output is the
  // smoothed b = box(p): box applied twice.
  double const_err = 0.0;
  for (std::size_t r : {1u, 2u, 5u}) {
    const Plane p = lt::random_plane(32, 32, 40 + r);
    const Plane g(32, 32, 0.35);
    const Plane q = guided_upsample_unclamped(p, g, g, GuidedFilterParams{r, 1e-2});
    const long rr = static_cast<long>(r);
    const_err = std::max(const_err, lt::max_abs_diff(q.data(), brute_box(brute_box(p, rr), rr).data()));
  }
  return {self_err < 1e-6 && const_err < 1e-10,
          fmt("self-guidance interior error %.3g (limit 1e-6), constant-guide error %.3g (limit 1e-10)", self_err,
              const_err)};
}

Verdict synthetic_enhancement() {
  const EnhancementConfig cfg;
  bool ok = true;
  std::ostringstream detail;
  for (const auto& name : kPhotos) {
    const PlanarImage ref = photo(name);
    const PlanarImage dark = dark_photo(name);
    const auto t0 = Clock::now();
    const EnhancementResult res = enhance(dark, cfg);
    const double secs = seconds_since(t0);
    const MetricReport before = compare(dark, ref);
    const MetricReport after = compare(res.enhanced, ref);
    const double dpsnr = after.psnr_db - before.psnr_db;
    const double dssim = after.ssim - before.ssim;
    const bool good = dpsnr >= 5.0 && dssim >= 0.05 && secs <= 180.0;
    ok = ok && good;
    detail << name << fmt(" %+.2fdB %+.3fssim %.0fs%s; ", dpsnr, dssim, secs, good ? "" : " (miss)");
    std::fprintf(stderr, "%s: PSNR %.2f -> %.2f dB, SSIM %.4f -> %.4f, %.1f s\n", name.c_str(), before.psnr_db,
                 after.psnr_db, before.ssim, after.ssim, secs);
  }
  return {ok, detail.str() + "limits +5 dB, +0.05 SSIM, 180 s"};
}

Verdict exposure_monotonicity() {
  const PlanarImage dark = dark_photo("chelsea");
  AblationSweep sweep;
  sweep.kind = SweepKind::exposure_level;
  sweep.levels = {0.3, 0.5, 0.7, 0.9};
  const auto rows = ablate(dark, reduced_config(), sweep);
  bool ok = true;
  std::ostringstream detail;
  detail << "mean V:";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    detail << fmt(" L=%.1f %.4f", sweep.levels[i], rows[i].mean_value);
    if (i > 0 && rows[i].mean_value > rows[i - 1].mean_value) ok = false;
  }
  return {ok, detail.str() + " (must be non-increasing)"};
}

Verdict loss_toggle() {
  const PlanarImage dark = dark_photo("chelsea");
  AblationSweep sweep;
  sweep.kind = SweepKind::loss_mask;
  sweep.masks = {LossMask::parse("full"), LossMask::parse("no-sparsity"), LossMask::parse("no-smoothness")};
  const auto rows = ablate(dark, reduced_config(), sweep);
  const bool brighter = rows[1].mean_value > rows[0].mean_value;
  const bool rougher = rows[2].illumination_tv > rows[0].illumination_tv;
  return {brighter && rougher,
          fmt("mean V full %.4f vs no-sparsity %.4f; illumination TV full %.3f vs no-smoothness %.3f",
              rows[0].mean_value, rows[1].mean_value, rows[0].illumination_tv, rows[2].illumination_tv)};
}

Verdict optimization_sanity() {
  const EnhancementConfig cfg;
  bool ok = true;
  std::ostringstream detail;
  for (const auto& name : kPhotos) {
    const EnhancementResult res = enhance(dark_photo(name), cfg);
    const auto& ep = res.trace.epochs;
    bool finite = ep.size() == static_cast<std::size_t>(cfg.epochs);
    for (const auto& e : ep) finite = finite && e.finite();
    const bool decreased = finite && ep.back().total < ep.front().total;
    const bool params = res.params.all_finite();
    ok = ok && finite && decreased && params;
    detail << name << fmt(" %.4f->%.4f%s; ", ep.front().total, ep.back().total,
                          finite && decreased && params ? "" : " (miss)");
  }
  return {ok, detail.str() + "all epochs finite, parameters finite"};
}

Verdict determinism() {
  const PlanarImage dark = dark_photo("coffee");
  EnhancementConfig cfg = reduced_config();
  cfg.seed = 7;
  const auto a = enhance(dark, cfg);
  const auto b = enhance(dark, cfg);
  const bool png = encode_image(a.enhanced, ImageFormat::png) == encode_image(b.enhanced, ImageFormat::png);
  const bool trace = trace_to_jsonl(a.trace.epochs) == trace_to_jsonl(b.trace.epochs);
  const bool samples = lt::max_abs_diff(a.enhanced.data(), b.enhanced.data()) == 0.0;
  return {png && trace && samples, fmt("PNG bytes %s, traces %s, samples %s", png ? "identical" : "DIFFER",
                                       trace ? "identical" : "DIFFER", samples ? "identical" : "DIFFER")};
}

Verdict invariant_suite() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(12, 70);
  std::uniform_real_distribution<double> bright(0.05, 0.6);
  EnhancementConfig cfg;
  cfg.working_size = 32;
  cfg.epochs = 15;
  cfg.exposure.region_side = 8;
  cfg.network.hidden = 64;
  cfg.network.branch_out = 32;
  cfg.network.head_hidden = 64;
  cfg.lr = 1e-4;
  int fixtures = 0;
  std::vector<std::string> broken;
  double identity_err = 0.0;
  for (int trial = 0; trial < 48; ++trial) {
    const std::size_t h = dim(rng), w = dim(rng), c = trial % 4 == 3 ? 1 : 3;
    PlanarImage img = lt::random_image(h, w, c, 500 + trial, 0.0, bright(rng));
    cfg.seed = trial;
    cfg.window = ContextWindowSpec(1 + 2 * (trial % 4));
    const EnhancementResult res = enhance(img, cfg);
    const Plane& x = res.trace.illumination;
    const Plane& y = res.value_lowres;
    const Plane& z = res.enhanced_value_lowres;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i] >= cfg.illum_floor && x[i] <= 1.0)) broken.push_back(fmt("bounds(t%d)", trial));
      if (!(z[i] >= y[i])) broken.push_back(fmt("brightening(t%d)", trial));
      if (z[i] < 1.0) identity_err = std::max(identity_err, std::abs(z[i] * x[i] - y[i]));
    }
    if (res.enhanced.height() != h || res.enhanced.width() != w || res.enhanced.channels() != c) {
      broken.push_back(fmt("dimensions(t%d)", trial));
    }
    ++fixtures;
  }
  if (identity_err > 1e-12) broken.push_back(fmt("retinex identity error %.3g", identity_err));
  std::string detail = fmt("%d randomized fixtures, retinex identity error %.3g", fixtures, identity_err);
  if (!broken.empty()) detail += "; first violation: " + broken.front();
  return {broken.empty(), detail};
}

const std::vector<std::pair<const char*, std::function<Verdict()>>> kCriteria{
    {"gradient fidelity", gradient_fidelity},
    {"colorspace roundtrip", colorspace_roundtrip},
    {"guided-filter oracles", guided_oracles},
    {"synthetic enhancement", synthetic_enhancement},
    {"exposure monotonicity", exposure_monotonicity},
    {"loss-toggle ablation", loss_toggle},
    {"optimization sanity", optimization_sanity},
    {"determinism", determinism},
    {"invariant suite", invariant_suite},
};

int run_one(int n) {
  const auto& [name, fn] = kCriteria.at(static_cast<std::size_t>(n - 1));
  Verdict v;
  try {
    v = fn();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  std::printf("criterion %d: %s %s: %s\n", n, v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
  std::fflush(stdout);
  return v.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  const int count = static_cast<int>(kCriteria.size());
  if (argc == 1) {
    int failed = 0;
    for (int n = 1; n <= count; ++n) failed += run_one(n);
    return failed == 0 ? 0 : 1;
  }
  int status = 0;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n < 1 || n > count) {
      std::fprintf(stderr, "usage: acceptance [1-%d ...]\n", count);
      return 2;
    }
    status |= run_one(n);
  }
  return status;
}
