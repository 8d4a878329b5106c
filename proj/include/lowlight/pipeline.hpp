#pragma once

// Per-image enhancement: V plane -> working resolution -> fit the implicit
// illumination network -> z = y / x -> guided upsampling -> recombine with
// the original hue and saturation.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lowlight/guided_filter.hpp"
#include "lowlight/image.hpp"
#include "lowlight/metrics.hpp"
#include "lowlight/neural.hpp"
#include "lowlight/objective.hpp"

namespace lowlight {

struct EnhancementConfig {
  LossWeights weights;
  ExposureSpec exposure;
  ContextWindowSpec window{7};
  int epochs = 100;
  double lr = 1e-5;
  std::size_t working_size = 256;
  GuidedFilterParams guided;
  double illum_floor = 1e-4;
  std::uint64_t seed = 0;
  /// Widths and sine frequencies; the context width always follows `window`.
  nn::NetworkShape network;

  nn::NetworkShape network_shape() const;
  /// Throws ArgumentError on any violated constraint.
  void validate() const;

  friend bool operator==(const EnhancementConfig&, const EnhancementConfig&) = default;
};

struct EnhancementTrace {
  std::vector<LossReport> epochs;  // loss before each optimizer step
  Plane illumination;              // final illumination at working resolution
  double wall_seconds = 0.0;
};

using EpochCallback = std::function<void(int epoch, const LossReport&)>;

struct IlluminationEstimate {
  Plane illumination;  // clamp(y + f(p, N(p)), illum_floor, 1)
  EnhancementTrace trace;
  nn::MlpParameters<float> params;  // fitted weights
};

/// Fit the network to one working-resolution value plane (working_size^2)
/// with full-batch Adam. Throws DivergenceError on a non-finite loss or
/// parameter.
IlluminationEstimate estimate_illumination(const Plane& value_lr, const EnhancementConfig& cfg,
                                           const EpochCallback& on_epoch = {});

/// x = clamp(y + residual, floor, 1); `clamped[i]` marks pixels outside (floor, 1).
Plane apply_residual(const Plane& value, std::span<const float> residuals, double floor,
                     std::vector<bool>* clamped = nullptr);

struct EnhancementResult {
  PlanarImage enhanced;
  EnhancementTrace trace;
  Plane value_lowres;           // y at working resolution
  Plane enhanced_value_lowres;  // clamp(y / x, 0, 1)
  Plane enhanced_value;         // full-resolution V after guided upsampling
  nn::MlpParameters<float> params;
};

/// 1-channel inputs are enhanced as their own V plane; 3-channel inputs go
/// through HSV. Output dimensions equal the input's.
EnhancementResult enhance(const PlanarImage& img, const EnhancementConfig& cfg,
                          const EpochCallback& on_epoch = {});

/// Sum of absolute forward differences in both directions.
double total_variation(const Plane& plane);

// ---------------------------------------------------------------------------
// Ablation sweeps

struct LossMask {
  bool fidelity = true;
  bool smoothness = true;
  bool exposure = true;
  bool sparsity = true;

  LossWeights apply(LossWeights w) const;
  std::string label() const;
  /// Parses "full" or "no-<term>" (term: fidelity, smoothness, exposure, sparsity),
  /// several removals joined with '+'.
  static LossMask parse(const std::string& text);
  /// The four combinations: without smoothness, without exposure, without sparsity, full.
  static std::vector<LossMask> standard_set();

  friend bool operator==(const LossMask&, const LossMask&) = default;
};

enum class SweepKind { window, exposure_level, loss_mask };

struct AblationSweep {
  SweepKind kind = SweepKind::window;
  std::vector<int> windows;
  std::vector<double> levels;
  std::vector<LossMask> masks;

  std::size_t size() const noexcept;
  std::string label(std::size_t i) const;
  EnhancementConfig apply(const EnhancementConfig& base, std::size_t i) const;
};

struct AblationRow {
  std::string label;
  EnhancementConfig config;
  EnhancementResult result;
  double mean_value = 0.0;        // mean of the enhanced full-resolution V plane
  double illumination_tv = 0.0;   // total_variation of the working illumination
  std::optional<MetricReport> metrics;
};

/// Runs enhance() once per setting with the base seed. Throws ArgumentError on
/// an empty sweep.
std::vector<AblationRow> ablate(const PlanarImage& img, const EnhancementConfig& base,
                                const AblationSweep& sweep,
                                const PlanarImage* reference = nullptr);

std::string sweep_kind_name(SweepKind kind);

}  // namespace lowlight
