#include "lowlight/neural.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <string>

#include "lowlight/errors.hpp"
#include "lowlight/kernels.hpp"

namespace lowlight::nn {

NetworkShape NetworkShape::for_window(ContextWindowSpec window) {
  NetworkShape shape;
  shape.context_dim = window.area();
  return shape;
}

Architecture::Architecture(NetworkShape shape) : shape_(shape) {
  if (shape.coord_dim == 0 || shape.context_dim == 0 || shape.hidden == 0 ||
      shape.branch_out == 0 || shape.head_hidden == 0) {
    throw ArgumentError("network dimensions must be positive");
  }
  const double first_bound_coord = 1.0 / static_cast<double>(shape.coord_dim);
  const double first_bound_context = 1.0 / static_cast<double>(shape.context_dim);
  auto deep_bound = [&](std::size_t in) {
    return std::sqrt(6.0 / static_cast<double>(in)) / shape.init_omega;
  };
  const std::size_t concat = 2 * shape.branch_out;
  layers_[kCoordIn] = {"coord.0", shape.coord_dim, shape.hidden, Activation::sine,
                       shape.first_omega, first_bound_coord, 0, 0};
  layers_[kCoordOut] = {"coord.1", shape.hidden, shape.branch_out, Activation::sine,
                        shape.hidden_omega, deep_bound(shape.hidden), 0, 0};
  layers_[kContextIn] = {"context.0", shape.context_dim, shape.hidden, Activation::sine,
                         shape.first_omega, first_bound_context, 0, 0};
  layers_[kContextOut] = {"context.1", shape.hidden, shape.branch_out, Activation::sine,
                          shape.hidden_omega, deep_bound(shape.hidden), 0, 0};
  layers_[kHeadHidden] = {"head.0", concat, shape.head_hidden, Activation::sine,
                          shape.hidden_omega, deep_bound(concat), 0, 0};
  layers_[kHeadOut] = {"head.1", shape.head_hidden, 1, Activation::identity, 1.0,
                       deep_bound(shape.head_hidden), 0, 0};
  std::size_t offset = 0;
  for (auto& l : layers_) {
    l.weight_offset = offset;
    offset += l.in_dim * l.out_dim;
    l.bias_offset = offset;
    offset += l.out_dim;
  }
  parameter_count_ = offset;
}

namespace {

std::atomic<std::uint64_t> g_next_id{1};

template <typename T>
DenseLayer<T> make_view(const Architecture& arch, std::span<T> values, LayerId id) {
  const LayerSpec& spec = arch.layer(id);
  return {&spec, values.subspan(spec.weight_offset, spec.in_dim * spec.out_dim),
          values.subspan(spec.bias_offset, spec.out_dim)};
}

}  // namespace

template <typename T>
MlpParameters<T>::MlpParameters(NetworkShape shape)
    : arch_(shape), values_(arch_.parameter_count(), T{0}), id_(g_next_id++) {}

template <typename T>
MlpParameters<T>::MlpParameters(const MlpParameters& other)
    : arch_(other.arch_), values_(other.values_), id_(g_next_id++) {}

template <typename T>
MlpParameters<T>& MlpParameters<T>::operator=(const MlpParameters& other) {
  if (this != &other) {
    arch_ = other.arch_;
    values_ = other.values_;
    ++revision_;
  }
  return *this;
}

template <typename T>
DenseLayer<const T> MlpParameters<T>::layer(LayerId id) const noexcept {
  return make_view<const T>(arch_, std::span<const T>(values_), id);
}

template <typename T>
DenseLayer<T> MlpParameters<T>::mutable_layer(LayerId id) noexcept {
  return make_view<T>(arch_, mutable_values(), id);
}

template <typename T>
bool MlpParameters<T>::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
DenseLayer<T> GradientBuffer<T>::layer(LayerId id) noexcept {
  return make_view<T>(arch, std::span<T>(values), id);
}

template <typename T>
DenseLayer<const T> GradientBuffer<T>::layer(LayerId id) const noexcept {
  return make_view<const T>(arch, std::span<const T>(values), id);
}

double normalized_coordinate(std::size_t index, std::size_t dim) noexcept {
  if (dim <= 1) return 0.0;
  return 2.0 * static_cast<double>(index) / static_cast<double>(dim - 1) - 1.0;
}

template <typename T>
DesignMatrix<T> build_design_matrix(const Plane& plane, ContextWindowSpec window) {
  const Matrix<double> ctx = extract_context(plane, window);
  DesignMatrix<T> out{Matrix<T>(plane.size(), 2), Matrix<T>(ctx.rows, ctx.cols)};
  for (std::size_t y = 0; y < plane.height(); ++y) {
    for (std::size_t x = 0; x < plane.width(); ++x) {
      const std::size_t r = y * plane.width() + x;
      out.coords(r, 0) = static_cast<T>(normalized_coordinate(y, plane.height()));
      out.coords(r, 1) = static_cast<T>(normalized_coordinate(x, plane.width()));
    }
  }
  std::transform(ctx.values.begin(), ctx.values.end(), out.context.values.begin(),
                 [](double v) { return static_cast<T>(v); });
  return out;
}

template <typename T>
MlpParameters<T> init_parameters(const NetworkShape& shape, std::uint64_t seed) {
  MlpParameters<T> params(shape);
  std::mt19937_64 rng(seed);
  // 53 random bits -> [0,1); independent of the standard library's distributions.
  auto uniform = [&rng](double bound) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return (2.0 * u - 1.0) * bound;
  };
  for (std::size_t id = 0; id < kLayerCount; ++id) {
    DenseLayer<T> l = params.mutable_layer(static_cast<LayerId>(id));
    for (T& w : l.weights) w = static_cast<T>(uniform(l.spec->init_bound));
    for (T& b : l.bias) b = static_cast<T>(uniform(l.spec->init_bound));
  }
  return params;
}

template <typename U>
struct TapeAccess {
  // Pass the full batch through the network. With a tape, every sine
  // layer's activation and derivative are kept for backward().
  static std::vector<U> run(const MlpParameters<U>& params, const DesignMatrix<U>& batch,
                            Tape<U>* tape);
  static GradientBuffer<U> back(const MlpParameters<U>& params, const Tape<U>& tape,
                                std::span<const U> residual_grads);
};

namespace {

template <typename T>
std::vector<T> transposed(const DenseLayer<const T>& l) {
  const std::size_t in = l.spec->in_dim;
  const std::size_t out = l.spec->out_dim;
  std::vector<T> t(in * out);
  for (std::size_t o = 0; o < out; ++o) {
    for (std::size_t i = 0; i < in; ++i) t[i * out + o] = l.weights[o * in + i];
  }
  return t;
}

// out[r, 0:out_dim] (row stride ld_out) = activation(input[r, :] W^T + b).
template <typename T>
void dense_forward(const DenseLayer<const T>& l, std::size_t rows, const T* input,
                   std::size_t ld_in, T* out, std::size_t ld_out, T* deriv) {
  const auto& k = simd::kernels<T>();
  const std::size_t n = l.spec->out_dim;
  for (std::size_t r = 0; r < rows; ++r) std::copy(l.bias.begin(), l.bias.end(), out + r * ld_out);
  const std::vector<T> wt = transposed(l);
  k.gemm(rows, n, l.spec->in_dim, input, ld_in, 1, wt.data(), n, out, ld_out, true);
  if (l.spec->activation == Activation::sine) {
    const T omega = static_cast<T>(l.spec->omega);
    if (ld_out == n) {
      k.sine(rows * n, omega, out, out, deriv);
    } else {
      for (std::size_t r = 0; r < rows; ++r) {
        k.sine(n, omega, out + r * ld_out, out + r * ld_out, deriv ? deriv + r * ld_out : nullptr);
      }
    }
  }
}

// Given dZ (pre-activation gradient, row stride ld_dz), accumulate dW, db and
// optionally write dX = dZ W.
template <typename T>
void dense_backward(const DenseLayer<const T>& l, DenseLayer<T> g, std::size_t rows, const T* dz,
                    std::size_t ld_dz, const T* input, std::size_t ld_in, T* dx, std::size_t ld_dx) {
  const auto& k = simd::kernels<T>();
  const std::size_t in = l.spec->in_dim;
  const std::size_t out = l.spec->out_dim;
  // dW[o, i] = sum_r dz[r, o] * input[r, i]
  k.gemm(out, in, rows, dz, 1, ld_dz, input, ld_in, g.weights.data(), in, false);
  std::fill(g.bias.begin(), g.bias.end(), T{0});
  k.column_sums(rows, out, dz, ld_dz, g.bias.data());
  if (dx) k.gemm(rows, in, out, dz, ld_dz, 1, l.weights.data(), in, dx, ld_dx, false);
}

template <typename T>
void check_batch(const Architecture& arch, const DesignMatrix<T>& batch) {
  const NetworkShape& s = arch.shape();
  if (batch.coords.cols != s.coord_dim || batch.context.cols != s.context_dim ||
      batch.context.rows != batch.coords.rows) {
    throw ArgumentError("design matrix (" + std::to_string(batch.coords.cols) + " coordinate, " +
                        std::to_string(batch.context.cols) +
                        " context columns) does not match the network (" +
                        std::to_string(s.coord_dim) + ", " + std::to_string(s.context_dim) + ")");
  }
}

}  // namespace

template <typename U>
std::vector<U> TapeAccess<U>::run(const MlpParameters<U>& params, const DesignMatrix<U>& batch,
                                  Tape<U>* tape) {
  check_batch(params.architecture(), batch);
  const NetworkShape& s = params.architecture().shape();
  const std::size_t rows = batch.rows();
  const std::size_t concat = 2 * s.branch_out;

  Tape<U> local;
  Tape<U>& t = tape ? *tape : local;
  t.coord_act.resize(rows * s.hidden);
  t.context_act.resize(rows * s.hidden);
  t.concat_act.resize(rows * concat);
  t.head_act.resize(rows * s.head_hidden);
  if (tape) {
    t.coord_deriv.resize(t.coord_act.size());
    t.context_deriv.resize(t.context_act.size());
    t.concat_deriv.resize(t.concat_act.size());
    t.head_deriv.resize(t.head_act.size());
  }
  auto d = [&](std::vector<U>& v, std::size_t offset = 0) {
    return tape ? v.data() + offset : nullptr;
  };

  dense_forward(params.layer(kCoordIn), rows, batch.coords.values.data(), s.coord_dim,
                t.coord_act.data(), s.hidden, d(t.coord_deriv));
  dense_forward(params.layer(kCoordOut), rows, t.coord_act.data(), s.hidden, t.concat_act.data(),
                concat, d(t.concat_deriv));
  dense_forward(params.layer(kContextIn), rows, batch.context.values.data(), s.context_dim,
                t.context_act.data(), s.hidden, d(t.context_deriv));
  dense_forward(params.layer(kContextOut), rows, t.context_act.data(), s.hidden,
                t.concat_act.data() + s.branch_out, concat, d(t.concat_deriv, s.branch_out));
  dense_forward(params.layer(kHeadHidden), rows, t.concat_act.data(), concat, t.head_act.data(),
                s.head_hidden, d(t.head_deriv));
  std::vector<U> residuals(rows);
  dense_forward(params.layer(kHeadOut), rows, t.head_act.data(), s.head_hidden, residuals.data(), 1,
                static_cast<U*>(nullptr));

  if (tape) {
    tape->batch_ = &batch;
    tape->rows_ = rows;
    tape->params_id_ = params.id();
    tape->params_revision_ = params.revision();
  }
  return residuals;
}

template <typename U>
GradientBuffer<U> TapeAccess<U>::back(const MlpParameters<U>& params, const Tape<U>& tape,
                                      std::span<const U> residual_grads) {
  if (tape.batch_ == nullptr) throw ContractError("backward called with an empty tape");
  if (tape.params_id_ != params.id() || tape.params_revision_ != params.revision()) {
    throw ContractError("stale tape: parameters changed since the forward pass");
  }
  if (residual_grads.size() != tape.rows_) {
    throw ArgumentError("residual gradient count does not match the tape's batch size");
  }
  const auto& k = simd::kernels<U>();
  const NetworkShape& s = params.architecture().shape();
  const DesignMatrix<U>& batch = *tape.batch_;
  const std::size_t rows = tape.rows_;
  const std::size_t concat = 2 * s.branch_out;
  GradientBuffer<U> grads(params.architecture());

  // head.1 (identity): dZ = residual_grads
  std::vector<U>& buf_a = tape.scratch_hidden;
  buf_a.resize(rows * std::max(s.head_hidden, s.hidden));
  dense_backward(params.layer(kHeadOut), grads.layer(kHeadOut), rows, residual_grads.data(), 1,
                 tape.head_act.data(), s.head_hidden, buf_a.data(), s.head_hidden);
  // head.0
  k.multiply(rows * s.head_hidden, buf_a.data(), tape.head_deriv.data(), buf_a.data());
  std::vector<U>& buf_concat = tape.scratch_concat;
  buf_concat.resize(rows * concat);
  dense_backward(params.layer(kHeadHidden), grads.layer(kHeadHidden), rows, buf_a.data(),
                 s.head_hidden, tape.concat_act.data(), concat, buf_concat.data(), concat);
  k.multiply(rows * concat, buf_concat.data(), tape.concat_deriv.data(), buf_concat.data());
  // coordinate branch
  dense_backward(params.layer(kCoordOut), grads.layer(kCoordOut), rows, buf_concat.data(), concat,
                 tape.coord_act.data(), s.hidden, buf_a.data(), s.hidden);
  k.multiply(rows * s.hidden, buf_a.data(), tape.coord_deriv.data(), buf_a.data());
  dense_backward(params.layer(kCoordIn), grads.layer(kCoordIn), rows, buf_a.data(), s.hidden,
                 batch.coords.values.data(), s.coord_dim, static_cast<U*>(nullptr), 0);
  // context branch
  dense_backward(params.layer(kContextOut), grads.layer(kContextOut), rows,
                 buf_concat.data() + s.branch_out, concat, tape.context_act.data(), s.hidden,
                 buf_a.data(), s.hidden);
  k.multiply(rows * s.hidden, buf_a.data(), tape.context_deriv.data(), buf_a.data());
  dense_backward(params.layer(kContextIn), grads.layer(kContextIn), rows, buf_a.data(), s.hidden,
                 batch.context.values.data(), s.context_dim, static_cast<U*>(nullptr), 0);
  return grads;
}

template <typename T>
ForwardResult<T> forward(const MlpParameters<T>& params, const DesignMatrix<T>& batch) {
  ForwardResult<T> result;
  result.residuals = TapeAccess<T>::run(params, batch, &result.tape);
  return result;
}

template <typename T>
void forward_into(const MlpParameters<T>& params, const DesignMatrix<T>& batch,
                  ForwardResult<T>& out) {
  out.residuals = TapeAccess<T>::run(params, batch, &out.tape);
}

template <typename T>
std::vector<T> predict(const MlpParameters<T>& params, const DesignMatrix<T>& batch) {
  return TapeAccess<T>::run(params, batch, nullptr);
}

template <typename T>
GradientBuffer<T> backward(const MlpParameters<T>& params, const Tape<T>& tape,
                           std::span<const T> residual_grads) {
  return TapeAccess<T>::back(params, tape, residual_grads);
}

template <typename T>
void adam_step(MlpParameters<T>& params, const GradientBuffer<T>& grads, AdamState<T>& state) {
  const std::size_t n = params.size();
  if (grads.values.size() != n || state.m.size() != n || state.v.size() != n) {
    throw ArgumentError("Adam state and gradients must match the parameter count");
  }
  ++state.step;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  auto theta = params.mutable_values();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads.values[i];
    const double m = b1 * state.m[i] + (1.0 - b1) * g;
    const double v = b2 * state.v[i] + (1.0 - b2) * g * g;
    state.m[i] = static_cast<T>(m);
    state.v[i] = static_cast<T>(v);
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    theta[i] = static_cast<T>(theta[i] - state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon));
  }
}

#define LOWLIGHT_INSTANTIATE(T)                                                                 \
  template class MlpParameters<T>;                                                              \
  template struct GradientBuffer<T>;                                                            \
  template struct TapeAccess<T>;                                                                \
  template DesignMatrix<T> build_design_matrix<T>(const Plane&, ContextWindowSpec);             \
  template MlpParameters<T> init_parameters<T>(const NetworkShape&, std::uint64_t);             \
  template ForwardResult<T> forward<T>(const MlpParameters<T>&, const DesignMatrix<T>&);        \
  template void forward_into<T>(const MlpParameters<T>&, const DesignMatrix<T>&,                \
                                ForwardResult<T>&);                                             \
  template std::vector<T> predict<T>(const MlpParameters<T>&, const DesignMatrix<T>&);          \
  template GradientBuffer<T> backward<T>(const MlpParameters<T>&, const Tape<T>&,               \
                                         std::span<const T>);                                   \
  template void adam_step<T>(MlpParameters<T>&, const GradientBuffer<T>&, AdamState<T>&);

LOWLIGHT_INSTANTIATE(float)
LOWLIGHT_INSTANTIATE(double)

#undef LOWLIGHT_INSTANTIATE

}  // namespace lowlight::nn
