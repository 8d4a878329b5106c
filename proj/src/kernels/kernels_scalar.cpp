#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "lowlight/kernels.hpp"

namespace lowlight::simd {

namespace {

template <typename T>
void gemm_scalar(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t a_rs,
                 std::size_t a_cs, const T* b, std::size_t ldb, T* c, std::size_t ldc,
                 bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * ldc;
    if (!accumulate) std::memset(crow, 0, n * sizeof(T));
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * a_rs + p * a_cs];
      const T* brow = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void sine_scalar(std::size_t n, T omega, const T* z, T* act, T* deriv) {
  for (std::size_t i = 0; i < n; ++i) {
    const T x = omega * z[i];
    act[i] = std::sin(x);
    if (deriv) deriv[i] = omega * std::cos(x);
  }
}

template <typename T>
void multiply_scalar(std::size_t n, const T* x, const T* y, T* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

template <typename T>
void column_sums_scalar(std::size_t rows, std::size_t cols, const T* x, std::size_t ld, T* sums) {
  for (std::size_t i = 0; i < rows; ++i) {
    const T* row = x + i * ld;
    for (std::size_t j = 0; j < cols; ++j) sums[j] += row[j];
  }
}

template <typename T>
constexpr KernelTable<T> kScalarTable{gemm_scalar<T>, sine_scalar<T>, multiply_scalar<T>,
                                      column_sums_scalar<T>};

Isa initial_isa() noexcept {
  if (const char* env = std::getenv("LOWLIGHT_ISA")) {
    if (std::string(env) == "scalar") return Isa::scalar;
  }
  return detect_isa();
}

Isa g_active = initial_isa();

}  // namespace

namespace detail {
template <typename T>
const KernelTable<T>& scalar_table() noexcept {
  return kScalarTable<T>;
}
template const KernelTable<float>& scalar_table<float>() noexcept;
template const KernelTable<double>& scalar_table<double>() noexcept;
}  // namespace detail

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  if (isa == Isa::scalar) return true;
#if defined(__x86_64__) || defined(__i386__)
  if (detail::avx2_table<float>() == nullptr) return false;
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect_isa() noexcept { return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

Isa active_isa() noexcept { return g_active; }

void set_active_isa(Isa isa) noexcept { g_active = isa_available(isa) ? isa : Isa::scalar; }

template <typename T>
const KernelTable<T>& kernels(Isa isa) noexcept {
  if (isa == Isa::avx2 && isa_available(Isa::avx2)) return *detail::avx2_table<T>();
  return detail::scalar_table<T>();
}

template const KernelTable<float>& kernels<float>(Isa) noexcept;
template const KernelTable<double>& kernels<double>(Isa) noexcept;

}  // namespace lowlight::simd
