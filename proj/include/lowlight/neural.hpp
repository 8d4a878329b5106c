#pragma once

// Two-branch sine-activated MLP mapping (pixel coordinate, context window)
// to a scalar illumination residual, with hand-written backpropagation and
// Adam. Templated on the scalar type: the optimizer runs in float, the
// gradient checks in double.
//
//   coords  (2)   -> sine(256) -> sine(128) --+
//                                               concat(256) -> sine(256) -> linear(1)
//   context (W*W) -> sine(256) -> sine(128) --+

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "lowlight/image.hpp"

namespace lowlight::nn {

enum class Activation { sine, identity };

struct NetworkShape {
  std::size_t coord_dim = 2;
  std::size_t context_dim = 49;
  std::size_t hidden = 256;       // width of the first layer of each branch
  std::size_t branch_out = 128;   // each branch's output; the head sees 2 * branch_out
  std::size_t head_hidden = 256;
  double first_omega = 30.0;      // frequency of the first sine layer of each branch
  double hidden_omega = 30.0;     // frequency of every deeper sine layer
  double init_omega = 30.0;       // scale in the sqrt(6/n)/omega init bound of non-first layers

  static NetworkShape for_window(ContextWindowSpec window);

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

enum LayerId : std::size_t {
  kCoordIn = 0,
  kCoordOut,
  kContextIn,
  kContextOut,
  kHeadHidden,
  kHeadOut,
  kLayerCount
};

struct LayerSpec {
  const char* name;
  std::size_t in_dim;
  std::size_t out_dim;
  Activation activation;
  double omega;
  double init_bound;
  std::size_t weight_offset;  // out_dim x in_dim, row-major
  std::size_t bias_offset;
};

/// Layer table and flat parameter layout shared by parameters, gradients and
/// optimizer moments.
class Architecture {
 public:
  explicit Architecture(NetworkShape shape = {});

  const NetworkShape& shape() const noexcept { return shape_; }
  const LayerSpec& layer(LayerId id) const noexcept { return layers_[id]; }
  const std::array<LayerSpec, kLayerCount>& layers() const noexcept { return layers_; }
  std::size_t parameter_count() const noexcept { return parameter_count_; }

  friend bool operator==(const Architecture& a, const Architecture& b) { return a.shape_ == b.shape_; }

 private:
  NetworkShape shape_;
  std::array<LayerSpec, kLayerCount> layers_{};
  std::size_t parameter_count_ = 0;
};

/// View of one dense layer inside a flat parameter (or gradient) vector.
template <typename T>
struct DenseLayer {
  const LayerSpec* spec;
  std::span<T> weights;
  std::span<T> bias;

  T& weight(std::size_t out, std::size_t in) const noexcept { return weights[out * spec->in_dim + in]; }
};

template <typename T>
class MlpParameters {
 public:
  explicit MlpParameters(NetworkShape shape = {});

  const Architecture& architecture() const noexcept { return arch_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const T> values() const noexcept { return values_; }
  /// Mutable access invalidates outstanding tapes.
  std::span<T> mutable_values() noexcept {
    ++revision_;
    return values_;
  }

  DenseLayer<const T> layer(LayerId id) const noexcept;
  DenseLayer<T> mutable_layer(LayerId id) noexcept;

  /// Instance identity and modification counter; a tape records both.
  std::uint64_t id() const noexcept { return id_; }
  std::uint64_t revision() const noexcept { return revision_; }

  bool all_finite() const noexcept;

  template <typename U>
  MlpParameters<U> cast() const {
    MlpParameters<U> out(arch_.shape());
    auto dst = out.mutable_values();
    for (std::size_t i = 0; i < values_.size(); ++i) dst[i] = static_cast<U>(values_[i]);
    return out;
  }

  MlpParameters(const MlpParameters& other);
  MlpParameters& operator=(const MlpParameters& other);
  MlpParameters(MlpParameters&&) noexcept = default;
  MlpParameters& operator=(MlpParameters&&) noexcept = default;

 private:
  Architecture arch_;
  std::vector<T> values_;
  std::uint64_t id_;
  std::uint64_t revision_ = 0;
};

/// dL/dtheta in the same flat layout as MlpParameters.
template <typename T>
struct GradientBuffer {
  Architecture arch;
  std::vector<T> values;

  explicit GradientBuffer(const Architecture& a) : arch(a), values(a.parameter_count(), T{0}) {}

  DenseLayer<T> layer(LayerId id) noexcept;
  DenseLayer<const T> layer(LayerId id) const noexcept;
};

/// One row per pixel: 2 normalized coordinates and the flattened context window.
template <typename T>
struct DesignMatrix {
  Matrix<T> coords;
  Matrix<T> context;

  std::size_t rows() const noexcept { return coords.rows; }
};

/// Maps pixel index 0..dim-1 onto [-1, 1]; a single-pixel axis maps to 0.
double normalized_coordinate(std::size_t index, std::size_t dim) noexcept;

/// Coordinates are (row, column) per pixel in row-major order; contexts come
/// from the reflect-101 padded plane.
template <typename T>
DesignMatrix<T> build_design_matrix(const Plane& plane, ContextWindowSpec window);

/// Cached activations of a forward pass, consumed by backward().
/// Holds a pointer to the batch, which must outlive the tape.
template <typename T>
class Tape {
 public:
  Tape() = default;
  std::size_t rows() const noexcept { return rows_; }
  bool empty() const noexcept { return batch_ == nullptr; }

 private:
  template <typename U>
  friend struct TapeAccess;

  const DesignMatrix<T>* batch_ = nullptr;
  std::size_t rows_ = 0;
  std::uint64_t params_id_ = 0;
  std::uint64_t params_revision_ = 0;
  // sin(omega z) and omega cos(omega z) for every sine layer; the two branch
  // outputs share one concatenated buffer (coords first).
  std::vector<T> coord_act, coord_deriv;
  std::vector<T> context_act, context_deriv;
  std::vector<T> concat_act, concat_deriv;
  std::vector<T> head_act, head_deriv;
  // backward() workspace, kept to avoid reallocating per step
  mutable std::vector<T> scratch_hidden, scratch_concat;
};

template <typename T>
struct ForwardResult {
  std::vector<T> residuals;
  Tape<T> tape;
};

/// Deterministic initialization from a 64-bit seed. First layer of each
/// branch: U(-1/in, 1/in); all other layers: U(-sqrt(6/in)/init_omega, +).
/// Biases use the same bound as their layer's weights.
template <typename T>
MlpParameters<T> init_parameters(const NetworkShape& shape, std::uint64_t seed);

template <typename T>
MlpParameters<T> init_parameters(ContextWindowSpec window, std::uint64_t seed) {
  return init_parameters<T>(NetworkShape::for_window(window), seed);
}

/// Throws ArgumentError if the batch widths do not match the architecture.
template <typename T>
ForwardResult<T> forward(const MlpParameters<T>& params, const DesignMatrix<T>& batch);

/// forward() that reuses the buffers already held by `out`.
template <typename T>
void forward_into(const MlpParameters<T>& params, const DesignMatrix<T>& batch,
                  ForwardResult<T>& out);

/// Forward pass without a tape.
template <typename T>
std::vector<T> predict(const MlpParameters<T>& params, const DesignMatrix<T>& batch);

/// Gradient of sum_i residual_grads[i] * residual_i with respect to every
/// parameter. Throws ContractError when the tape was produced for a different
/// parameter instance or revision.
template <typename T>
GradientBuffer<T> backward(const MlpParameters<T>& params, const Tape<T>& tape,
                           std::span<const T> residual_grads);

template <typename T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  std::int64_t step = 0;
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t n, double learning_rate = 1e-5)
      : m(n, T{0}), v(n, T{0}), lr(learning_rate) {}
};

/// Bias-corrected Adam: m <- b1 m + (1-b1) g, v <- b2 v + (1-b2) g^2,
/// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
template <typename T>
void adam_step(MlpParameters<T>& params, const GradientBuffer<T>& grads, AdamState<T>& state);

// ---------------------------------------------------------------------------
// Snapshot file: one line of JSON (layer shapes, parameter count, optional
// Adam bookkeeping) terminated by '\n', then the parameters as little-endian
// IEEE-754 float64, followed by the Adam m and v vectors when the header
// says "has_adam": true.

struct Snapshot {
  MlpParameters<double> params;
  std::optional<AdamState<double>> adam;
};

template <typename T>
void save_snapshot(std::ostream& out, const MlpParameters<T>& params,
                   const AdamState<T>* adam = nullptr);

/// Throws DecodeError on a malformed header or truncated payload.
Snapshot load_snapshot(std::istream& in);

}  // namespace lowlight::nn
