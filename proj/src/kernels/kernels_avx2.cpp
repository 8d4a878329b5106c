// AVX2 + FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; nothing here may run before the dispatcher has checked CPU
// support.

#include "lowlight/kernels.hpp"

#if defined(LOWLIGHT_HAVE_AVX2)

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

namespace lowlight::simd {

namespace {

template <typename T>
struct Vec;

template <>
struct Vec<float> {
  using Reg = __m256;
  static constexpr std::size_t width = 8;
  static Reg zero() { return _mm256_setzero_ps(); }
  static Reg load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, Reg v) { _mm256_storeu_ps(p, v); }
  static Reg broadcast(const float* p) { return _mm256_broadcast_ss(p); }
  static Reg fmadd(Reg a, Reg b, Reg c) { return _mm256_fmadd_ps(a, b, c); }
  static Reg add(Reg a, Reg b) { return _mm256_add_ps(a, b); }
  static Reg mul(Reg a, Reg b) { return _mm256_mul_ps(a, b); }
  static __m256i mask(std::size_t lanes) {
    return _mm256_cmpgt_epi32(_mm256_set1_epi32(static_cast<int>(lanes)),
                              _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7));
  }
  static Reg maskload(const float* p, __m256i m) { return _mm256_maskload_ps(p, m); }
  static void maskstore(float* p, __m256i m, Reg v) { _mm256_maskstore_ps(p, m, v); }
};

template <>
struct Vec<double> {
  using Reg = __m256d;
  static constexpr std::size_t width = 4;
  static Reg zero() { return _mm256_setzero_pd(); }
  static Reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, Reg v) { _mm256_storeu_pd(p, v); }
  static Reg broadcast(const double* p) { return _mm256_broadcast_sd(p); }
  static Reg fmadd(Reg a, Reg b, Reg c) { return _mm256_fmadd_pd(a, b, c); }
  static Reg add(Reg a, Reg b) { return _mm256_add_pd(a, b); }
  static Reg mul(Reg a, Reg b) { return _mm256_mul_pd(a, b); }
  static __m256i mask(std::size_t lanes) {
    return _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<long long>(lanes)),
                              _mm256_setr_epi64x(0, 1, 2, 3));
  }
  static Reg maskload(const double* p, __m256i m) { return _mm256_maskload_pd(p, m); }
  static void maskstore(double* p, __m256i m, Reg v) { _mm256_maskstore_pd(p, m, v); }
};

// ---------------------------------------------------------------------------
// GEMM: B is packed per k-chunk into zero-padded panels of NR = 2 * width
// columns, so the micro-kernel streams it from L1; A is read in place in
// blocks of kBlockRows rows that stay in L2. Each C entry still sums its
// products in increasing p.

constexpr std::size_t kMaxRows = 6;
constexpr std::size_t kChunk = 256;
constexpr std::size_t kBlockRows = 96;

template <typename T, std::size_t MR, bool FullC>
void micro_tile(std::size_t kc, const T* a, std::size_t a_rs, std::size_t a_cs, const T* panel,
                T* c, std::size_t ldc, std::size_t nc, bool load_c) {
  using V = Vec<T>;
  using Reg = typename V::Reg;
  constexpr std::size_t W = V::width;
  const __m256i m0 = V::mask(std::min(nc, W));
  const __m256i m1 = V::mask(nc > W ? nc - W : 0);

  Reg acc0[MR];
  Reg acc1[MR];
  for (std::size_t r = 0; r < MR; ++r) {
    if (load_c) {
      acc0[r] = FullC ? V::load(c + r * ldc) : V::maskload(c + r * ldc, m0);
      acc1[r] = FullC ? V::load(c + r * ldc + W) : V::maskload(c + r * ldc + W, m1);
    } else {
      acc0[r] = V::zero();
      acc1[r] = V::zero();
    }
  }
  for (std::size_t p = 0; p < kc; ++p) {
    const Reg b0 = V::load(panel + p * 2 * W);
    const Reg b1 = V::load(panel + p * 2 * W + W);
    const T* ap = a + p * a_cs;
    for (std::size_t r = 0; r < MR; ++r) {
      const Reg av = V::broadcast(ap + r * a_rs);
      acc0[r] = V::fmadd(av, b0, acc0[r]);
      acc1[r] = V::fmadd(av, b1, acc1[r]);
    }
  }
  for (std::size_t r = 0; r < MR; ++r) {
    if (FullC) {
      V::store(c + r * ldc, acc0[r]);
      V::store(c + r * ldc + W, acc1[r]);
    } else {
      V::maskstore(c + r * ldc, m0, acc0[r]);
      V::maskstore(c + r * ldc + W, m1, acc1[r]);
    }
  }
}

template <typename T, bool FullC>
void dispatch_tile(std::size_t mr, std::size_t kc, const T* a, std::size_t a_rs, std::size_t a_cs,
                   const T* panel, T* c, std::size_t ldc, std::size_t nc, bool load_c) {
  switch (mr) {
    case 6: return micro_tile<T, 6, FullC>(kc, a, a_rs, a_cs, panel, c, ldc, nc, load_c);
    case 5: return micro_tile<T, 5, FullC>(kc, a, a_rs, a_cs, panel, c, ldc, nc, load_c);
    case 4: return micro_tile<T, 4, FullC>(kc, a, a_rs, a_cs, panel, c, ldc, nc, load_c);
    case 3: return micro_tile<T, 3, FullC>(kc, a, a_rs, a_cs, panel, c, ldc, nc, load_c);
    case 2: return micro_tile<T, 2, FullC>(kc, a, a_rs, a_cs, panel, c, ldc, nc, load_c);
    default: return micro_tile<T, 1, FullC>(kc, a, a_rs, a_cs, panel, c, ldc, nc, load_c);
  }
}

// packed[panel][p][0..NR) = B[p0 + p, panel * NR + j], zero beyond n.
template <typename T>
void pack_b(std::size_t kc, std::size_t n, const T* b, std::size_t ldb, T* packed) {
  constexpr std::size_t NR = 2 * Vec<T>::width;
  for (std::size_t j0 = 0; j0 < n; j0 += NR) {
    const std::size_t nc = std::min(NR, n - j0);
    T* dst = packed + (j0 / NR) * kc * NR;
    for (std::size_t p = 0; p < kc; ++p) {
      const T* src = b + p * ldb + j0;
      std::copy(src, src + nc, dst + p * NR);
      std::fill(dst + p * NR + nc, dst + (p + 1) * NR, T{0});
    }
  }
}

template <typename T>
void gemm_avx2(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t a_rs,
               std::size_t a_cs, const T* b, std::size_t ldb, T* c, std::size_t ldc,
               bool accumulate) {
  constexpr std::size_t NR = 2 * Vec<T>::width;
  if (k == 0) {
    if (!accumulate) {
      for (std::size_t i = 0; i < m; ++i) std::memset(c + i * ldc, 0, n * sizeof(T));
    }
    return;
  }
  const std::size_t panels = (n + NR - 1) / NR;
  thread_local std::vector<T> packed;
  packed.resize(panels * NR * std::min(k, kChunk));

  for (std::size_t p0 = 0; p0 < k; p0 += kChunk) {
    const std::size_t kc = std::min(kChunk, k - p0);
    const bool load_c = accumulate || p0 > 0;
    pack_b(kc, n, b + p0 * ldb, ldb, packed.data());
    for (std::size_t ib = 0; ib < m; ib += kBlockRows) {
      const std::size_t mb = std::min(kBlockRows, m - ib);
      for (std::size_t jp = 0; jp < panels; ++jp) {
        const std::size_t j0 = jp * NR;
        const std::size_t nc = std::min(NR, n - j0);
        const T* panel = packed.data() + jp * kc * NR;
        for (std::size_t i0 = ib; i0 < ib + mb; i0 += kMaxRows) {
          const std::size_t mr = std::min(kMaxRows, ib + mb - i0);
          const T* a_tile = a + i0 * a_rs + p0 * a_cs;
          T* c_tile = c + i0 * ldc + j0;
          if (nc == NR) {
            dispatch_tile<T, true>(mr, kc, a_tile, a_rs, a_cs, panel, c_tile, ldc, nc, load_c);
          } else {
            dispatch_tile<T, false>(mr, kc, a_tile, a_rs, a_cs, panel, c_tile, ldc, nc, load_c);
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// sin/cos for packed floats: octant reduction with a three-part pi/4 and the
// classic minimax polynomials on [-pi/4, pi/4]. Absolute error ~1e-7 for
// |x| up to a few thousand.

inline void sincos8(__m256 x, __m256& s, __m256& c) {
  const __m256 sign_mask = _mm256_castsi256_ps(_mm256_set1_epi32(static_cast<int>(0x80000000u)));
  __m256 sign_sin = _mm256_and_ps(x, sign_mask);
  x = _mm256_andnot_ps(sign_mask, x);

  __m256i j = _mm256_cvttps_epi32(_mm256_mul_ps(x, _mm256_set1_ps(1.27323954473516f)));
  j = _mm256_add_epi32(j, _mm256_set1_epi32(1));
  j = _mm256_and_si256(j, _mm256_set1_epi32(~1));
  const __m256 y = _mm256_cvtepi32_ps(j);

  const __m256i four = _mm256_set1_epi32(4);
  const __m256i two = _mm256_set1_epi32(2);
  const __m256 swap_sin = _mm256_castsi256_ps(_mm256_slli_epi32(_mm256_and_si256(j, four), 29));
  const __m256 sign_cos = _mm256_castsi256_ps(
      _mm256_slli_epi32(_mm256_andnot_si256(_mm256_sub_epi32(j, two), four), 29));
  const __m256 use_sin_poly =
      _mm256_castsi256_ps(_mm256_cmpeq_epi32(_mm256_and_si256(j, two), _mm256_setzero_si256()));
  sign_sin = _mm256_xor_ps(sign_sin, swap_sin);

  x = _mm256_fmadd_ps(y, _mm256_set1_ps(-0.78515625f), x);
  x = _mm256_fmadd_ps(y, _mm256_set1_ps(-2.4187564849853515625e-4f), x);
  x = _mm256_fmadd_ps(y, _mm256_set1_ps(-3.77489497744594108e-8f), x);
  const __m256 z = _mm256_mul_ps(x, x);

  __m256 pc = _mm256_set1_ps(2.443315711809948e-5f);
  pc = _mm256_fmadd_ps(pc, z, _mm256_set1_ps(-1.388731625493765e-3f));
  pc = _mm256_fmadd_ps(pc, z, _mm256_set1_ps(4.166664568298827e-2f));
  pc = _mm256_mul_ps(_mm256_mul_ps(pc, z), z);
  pc = _mm256_fnmadd_ps(_mm256_set1_ps(0.5f), z, pc);
  pc = _mm256_add_ps(pc, _mm256_set1_ps(1.0f));

  __m256 ps = _mm256_set1_ps(-1.9515295891e-4f);
  ps = _mm256_fmadd_ps(ps, z, _mm256_set1_ps(8.3321608736e-3f));
  ps = _mm256_fmadd_ps(ps, z, _mm256_set1_ps(-1.6666654611e-1f));
  ps = _mm256_mul_ps(_mm256_mul_ps(ps, z), x);
  ps = _mm256_add_ps(ps, x);

  s = _mm256_xor_ps(_mm256_blendv_ps(pc, ps, use_sin_poly), sign_sin);
  c = _mm256_xor_ps(_mm256_blendv_ps(ps, pc, use_sin_poly), sign_cos);
}

void sine_avx2_float(std::size_t n, float omega, const float* z, float* act, float* deriv) {
  const __m256 w = _mm256_set1_ps(omega);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 s, c;
    sincos8(_mm256_mul_ps(w, _mm256_loadu_ps(z + i)), s, c);
    _mm256_storeu_ps(act + i, s);
    if (deriv) _mm256_storeu_ps(deriv + i, _mm256_mul_ps(w, c));
  }
  if (i < n) {
    const __m256i m = Vec<float>::mask(n - i);
    __m256 s, c;
    sincos8(_mm256_mul_ps(w, _mm256_maskload_ps(z + i, m)), s, c);
    _mm256_maskstore_ps(act + i, m, s);
    if (deriv) _mm256_maskstore_ps(deriv + i, m, _mm256_mul_ps(w, c));
  }
}

template <typename T>
void multiply_avx2(std::size_t n, const T* x, const T* y, T* out) {
  using V = Vec<T>;
  std::size_t i = 0;
  for (; i + V::width <= n; i += V::width) V::store(out + i, V::mul(V::load(x + i), V::load(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

template <typename T>
void column_sums_avx2(std::size_t rows, std::size_t cols, const T* x, std::size_t ld, T* sums) {
  using V = Vec<T>;
  // Row-major sweep; each column still accumulates its rows in order.
  const std::size_t vec_cols = cols - cols % V::width;
  for (std::size_t i = 0; i < rows; ++i) {
    const T* row = x + i * ld;
    std::size_t j = 0;
    for (; j < vec_cols; j += V::width) V::store(sums + j, V::add(V::load(sums + j), V::load(row + j)));
    for (; j < cols; ++j) sums[j] += row[j];
  }
}

const KernelTable<float> kAvx2Float{gemm_avx2<float>, sine_avx2_float, multiply_avx2<float>,
                                    column_sums_avx2<float>};

}  // namespace

namespace detail {

template <>
const KernelTable<float>* avx2_table<float>() noexcept {
  return &kAvx2Float;
}

template <>
const KernelTable<double>* avx2_table<double>() noexcept {
  // No vector sine for doubles; the double path is used for verification only.
  static const KernelTable<double> table{gemm_avx2<double>, scalar_table<double>().sine,
                                         multiply_avx2<double>, column_sums_avx2<double>};
  return &table;
}

}  // namespace detail

}  // namespace lowlight::simd

#else  // !LOWLIGHT_HAVE_AVX2

namespace lowlight::simd::detail {

template <>
const KernelTable<float>* avx2_table<float>() noexcept {
  return nullptr;
}

template <>
const KernelTable<double>* avx2_table<double>() noexcept {
  return nullptr;
}

}  // namespace lowlight::simd::detail

#endif
