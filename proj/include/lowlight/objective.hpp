#pragma once

// Zero-reference training objective over the illumination estimate x and the
// enhanced value plane z = y / x:
//
//   total = alpha * fidelity + beta * smoothness + gamma * exposure + delta * sparsity
//
// Every term returns its value together with the gradient of that value.

#include "lowlight/image.hpp"

namespace lowlight {

struct LossWeights {
  double alpha = 1.0;   // fidelity
  double beta = 20.0;   // smoothness
  double gamma = 8.0;   // exposure
  double delta = 5.0;   // sparsity

  void validate() const;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct ExposureSpec {
  double target_level = 0.5;  // L
  std::size_t region_side = 16;

  void validate() const;
  friend bool operator==(const ExposureSpec&, const ExposureSpec&) = default;
};

struct LossReport {
  double fidelity = 0.0;
  double smoothness = 0.0;
  double exposure = 0.0;
  double sparsity = 0.0;
  double total = 0.0;

  bool finite() const noexcept;
  friend bool operator==(const LossReport&, const LossReport&) = default;
};

struct LossTerm {
  double value = 0.0;
  Plane grad;
};

/// mean((x - y)^2); grad 2 (x - y) / M.
LossTerm fidelity_loss(const Plane& illumination, const Plane& observed);

/// (||D_v x||_F + ||D_h x||_F)^2 with forward differences and no wrap-around.
/// Requires H, W >= 2.
LossTerm smoothness_loss(const Plane& illumination);

/// (1/N) sum_k |sqrt(T_k) - L| over non-overlapping region_side^2 blocks with
/// means T_k. Dimensions must be divisible by region_side; T_k <= 0 raises
/// DomainError.
LossTerm exposure_loss(const Plane& illumination, const ExposureSpec& spec);

/// mean |z|; subgradient sign(z) / M with sign(0) = 0.
LossTerm sparsity_loss(const Plane& enhanced);

struct TotalLoss {
  LossReport report;
  Plane grad;  // d total / d illumination
};

/// Weighted sum of the four terms. The sparsity gradient is carried back to
/// the illumination through z = y / x (dz/dx = -y / x^2).
TotalLoss total_loss(const Plane& illumination, const Plane& observed, const Plane& enhanced,
                     const LossWeights& weights, const ExposureSpec& exposure);

}  // namespace lowlight
