#include "lowlight/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string>

#include "lowlight/colorspace.hpp"
#include "lowlight/errors.hpp"

namespace lowlight {

nn::NetworkShape EnhancementConfig::network_shape() const {
  nn::NetworkShape shape = network;
  shape.context_dim = window.area();
  return shape;
}

void EnhancementConfig::validate() const {
  weights.validate();
  exposure.validate();
  guided.validate();
  if (epochs < 1) throw ArgumentError("epochs must be at least 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ArgumentError("learning rate must be positive");
  if (working_size == 0) throw ArgumentError("working size must be positive");
  if (working_size % exposure.region_side != 0) {
    throw ArgumentError("working size " + std::to_string(working_size) +
                        " is not divisible by the exposure region side " +
                        std::to_string(exposure.region_side));
  }
  if (static_cast<std::size_t>(window.margin()) >= working_size) {
    throw ArgumentError("context window is larger than the working resolution");
  }
  if (!(illum_floor > 0.0 && illum_floor < 1.0)) {
    throw ArgumentError("illumination floor must lie in (0, 1)");
  }
  nn::Architecture check(network_shape());
  (void)check;
}

Plane apply_residual(const Plane& value, std::span<const float> residuals, double floor,
                     std::vector<bool>* clamped) {
  if (residuals.size() != value.size()) throw ArgumentError("residual count does not match plane");
  Plane x(value.height(), value.width());
  if (clamped) clamped->assign(value.size(), false);
  for (std::size_t i = 0; i < value.size(); ++i) {
    const double raw = value[i] + static_cast<double>(residuals[i]);
    // Gradients pass where floor <= raw <= 1 (inclusive, like a clamp's subgradient).
    const bool outside = !(raw >= floor && raw <= 1.0);
    if (clamped) (*clamped)[i] = outside;
    x[i] = std::isnan(raw) ? raw : std::clamp(raw, floor, 1.0);
  }
  return x;
}

namespace {

Plane divide(const Plane& y, const Plane& x) {
  Plane z(y.height(), y.width());
  for (std::size_t i = 0; i < y.size(); ++i) z[i] = y[i] / x[i];
  return z;
}

}  // namespace

IlluminationEstimate estimate_illumination(const Plane& value_lr, const EnhancementConfig& cfg,
                                           const EpochCallback& on_epoch) {
  cfg.validate();
  if (value_lr.height() != cfg.working_size || value_lr.width() != cfg.working_size) {
    throw ArgumentError("value plane must be " + std::to_string(cfg.working_size) + "x" +
                        std::to_string(cfg.working_size));
  }
  const auto start = std::chrono::steady_clock::now();
  const auto design = nn::build_design_matrix<float>(value_lr, cfg.window);
  auto params = nn::init_parameters<float>(cfg.network_shape(), cfg.seed);
  nn::AdamState<float> adam(params.size(), cfg.lr);

  IlluminationEstimate out;
  out.trace.epochs.reserve(static_cast<std::size_t>(cfg.epochs));
  nn::ForwardResult<float> fwd;
  std::vector<bool> clamped;
  std::vector<float> residual_grads(value_lr.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    nn::forward_into(params, design, fwd);
    const Plane x = apply_residual(value_lr, fwd.residuals, cfg.illum_floor, &clamped);
    const Plane z = divide(value_lr, x);
    const TotalLoss loss = total_loss(x, value_lr, z, cfg.weights, cfg.exposure);
    if (!loss.report.finite()) throw DivergenceError(epoch, "loss is not finite");
    out.trace.epochs.push_back(loss.report);
    if (on_epoch) on_epoch(epoch, loss.report);

    for (std::size_t i = 0; i < residual_grads.size(); ++i) {
      residual_grads[i] = clamped[i] ? 0.0f : static_cast<float>(loss.grad[i]);
    }
    const auto grads = nn::backward(params, fwd.tape, std::span<const float>(residual_grads));
    nn::adam_step(params, grads, adam);
    if (!params.all_finite()) throw DivergenceError(epoch, "parameters are not finite");
  }
  // Release the tape before the final pass.
  fwd = {};
  const std::vector<float> residuals = nn::predict(params, design);
  out.illumination = apply_residual(value_lr, residuals, cfg.illum_floor);
  out.trace.illumination = out.illumination;
  out.params = std::move(params);
  out.trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

EnhancementResult enhance(const PlanarImage& img, const EnhancementConfig& cfg,
                          const EpochCallback& on_epoch) {
  cfg.validate();
  if (img.pixel_count() == 0) throw ArgumentError("cannot enhance a zero-area image");
  if (img.channels() != 1 && img.channels() != 3) {
    throw ArgumentError("enhance expects a 1- or 3-channel image");
  }
  const auto start = std::chrono::steady_clock::now();

  std::optional<HsvDecomposition> hsv;
  Plane value;
  if (img.channels() == 3) {
    hsv = rgb_to_hsv(img);
    value = hsv->value;
  } else {
    value = img.channel(0);
  }

  EnhancementResult result;
  result.value_lowres = resize_bilinear(value, cfg.working_size, cfg.working_size);
  IlluminationEstimate est = estimate_illumination(result.value_lowres, cfg, on_epoch);

  result.enhanced_value_lowres = divide(result.value_lowres, est.illumination);
  for (double& v : result.enhanced_value_lowres.data()) v = std::clamp(v, 0.0, 1.0);
  result.enhanced_value =
      guided_upsample(result.enhanced_value_lowres, result.value_lowres, value, cfg.guided);

  if (hsv) {
    result.enhanced = recombine(*hsv, result.enhanced_value);
  } else {
    result.enhanced = PlanarImage(img.height(), img.width(), 1);
    result.enhanced.set_channel(0, result.enhanced_value);
  }
  result.trace = std::move(est.trace);
  result.params = std::move(est.params);
  result.trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

double total_variation(const Plane& p) {
  double tv = 0.0;
  for (std::size_t y = 0; y < p.height(); ++y) {
    for (std::size_t x = 0; x < p.width(); ++x) {
      if (y + 1 < p.height()) tv += std::abs(p.at(y + 1, x) - p.at(y, x));
      if (x + 1 < p.width()) tv += std::abs(p.at(y, x + 1) - p.at(y, x));
    }
  }
  return tv;
}

// ---------------------------------------------------------------------------

LossWeights LossMask::apply(LossWeights w) const {
  if (!fidelity) w.alpha = 0.0;
  if (!smoothness) w.beta = 0.0;
  if (!exposure) w.gamma = 0.0;
  if (!sparsity) w.delta = 0.0;
  return w;
}

std::string LossMask::label() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (on) return;
    if (!out.empty()) out += '+';
    out += "no-";
    out += name;
  };
  add(fidelity, "fidelity");
  add(smoothness, "smoothness");
  add(exposure, "exposure");
  add(sparsity, "sparsity");
  return out.empty() ? "full" : out;
}

LossMask LossMask::parse(const std::string& text) {
  LossMask mask;
  if (text == "full") return mask;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '+')) {
    if (part == "no-fidelity") {
      mask.fidelity = false;
    } else if (part == "no-smoothness") {
      mask.smoothness = false;
    } else if (part == "no-exposure") {
      mask.exposure = false;
    } else if (part == "no-sparsity") {
      mask.sparsity = false;
    } else {
      throw ArgumentError("unknown loss mask '" + text + "'");
    }
  }
  return mask;
}

std::vector<LossMask> LossMask::standard_set() {
  LossMask no_smooth;
  no_smooth.smoothness = false;
  LossMask no_exposure;
  no_exposure.exposure = false;
  LossMask no_sparsity;
  no_sparsity.sparsity = false;
  return {no_smooth, no_exposure, no_sparsity, LossMask{}};
}

std::size_t AblationSweep::size() const noexcept {
  switch (kind) {
    case SweepKind::window: return windows.size();
    case SweepKind::exposure_level: return levels.size();
    case SweepKind::loss_mask: return masks.size();
  }
  return 0;
}

std::string sweep_kind_name(SweepKind kind) {
  switch (kind) {
    case SweepKind::window: return "window";
    case SweepKind::exposure_level: return "L";
    case SweepKind::loss_mask: return "loss-mask";
  }
  return "unknown";
}

std::string AblationSweep::label(std::size_t i) const {
  switch (kind) {
    case SweepKind::window: return "window_" + std::to_string(windows.at(i));
    case SweepKind::exposure_level: {
      std::ostringstream os;
      os << "L_" << levels.at(i);
      return os.str();
    }
    case SweepKind::loss_mask: return masks.at(i).label();
  }
  return "setting_" + std::to_string(i);
}

EnhancementConfig AblationSweep::apply(const EnhancementConfig& base, std::size_t i) const {
  EnhancementConfig cfg = base;
  switch (kind) {
    case SweepKind::window: cfg.window = ContextWindowSpec(windows.at(i)); break;
    case SweepKind::exposure_level: cfg.exposure.target_level = levels.at(i); break;
    case SweepKind::loss_mask: cfg.weights = masks.at(i).apply(base.weights); break;
  }
  return cfg;
}

std::vector<AblationRow> ablate(const PlanarImage& img, const EnhancementConfig& base,
                                const AblationSweep& sweep, const PlanarImage* reference) {
  if (sweep.size() == 0) throw ArgumentError("ablation sweep is empty");
  std::vector<EnhancementConfig> configs;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    configs.push_back(sweep.apply(base, i));
    configs.back().validate();
  }
  std::vector<AblationRow> rows;
  rows.reserve(sweep.size());
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    AblationRow row;
    row.label = sweep.label(i);
    row.config = configs[i];
    row.result = enhance(img, row.config);
    row.mean_value = row.result.enhanced_value.mean();
    row.illumination_tv = total_variation(row.result.trace.illumination);
    if (reference) row.metrics = compare(row.result.enhanced, *reference);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace lowlight
