#pragma once

// Data-parallel inner loops of the optimizer: dense-layer GEMMs, sine
// activations and a few element-wise helpers. Every kernel has a portable
// scalar reference; AVX2+FMA variants are compiled separately and picked at
// runtime. Both implementations are exercised by the equivalence tests.

#include <cstddef>
#include <string_view>

namespace lowlight::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// Best ISA the running CPU supports (and this build was compiled with).
Isa detect_isa() noexcept;

/// ISA used by kernels<T>(). Defaults to detect_isa(), unless the environment
/// variable LOWLIGHT_ISA=scalar requests the reference path.
Isa active_isa() noexcept;

/// Override the active ISA (tests/benchmarks). Requesting an unsupported ISA
/// falls back to scalar. Not thread-safe with concurrent kernel calls.
void set_active_isa(Isa isa) noexcept;

bool isa_available(Isa isa) noexcept;

template <typename T>
struct KernelTable {
  /// C[m x n] (+)= A[m x k] * B[k x n].
  /// A(i, p) lives at a[i * a_row_stride + p * a_col_stride], so both A and
  /// A-transposed inputs are handled without copies. B and C are row-major
  /// with leading dimensions ldb / ldc. With accumulate == false, C is
  /// overwritten. The reduction over p always runs in increasing order.
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t a_row_stride,
               std::size_t a_col_stride, const T* b, std::size_t ldb, T* c, std::size_t ldc,
               bool accumulate);

  /// act[i] = sin(omega * z[i]); if deriv is non-null, deriv[i] = omega * cos(omega * z[i]).
  void (*sine)(std::size_t n, T omega, const T* z, T* act, T* deriv);

  /// out[i] = x[i] * y[i]
  void (*multiply)(std::size_t n, const T* x, const T* y, T* out);

  /// sums[j] += sum_i x[i * ld + j] for j < cols, rows visited in order.
  void (*column_sums)(std::size_t rows, std::size_t cols, const T* x, std::size_t ld, T* sums);
};

template <typename T>
const KernelTable<T>& kernels(Isa isa) noexcept;

template <typename T>
const KernelTable<T>& kernels() noexcept {
  return kernels<T>(active_isa());
}

namespace detail {
template <typename T>
const KernelTable<T>& scalar_table() noexcept;
template <typename T>
const KernelTable<T>* avx2_table() noexcept;  // nullptr when not compiled in
}  // namespace detail

}  // namespace lowlight::simd
