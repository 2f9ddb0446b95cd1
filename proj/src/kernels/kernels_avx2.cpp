#include <immintrin.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace sparsescale::kernels::detail {
namespace {

// Expands four mask bytes into an all-ones/all-zeros lane selector.
inline __m256d mask_lanes(const std::uint8_t* mask) {
  const __m256i bytes = _mm256_setr_epi64x(mask[0], mask[1], mask[2], mask[3]);
  const __m256i zero = _mm256_setzero_si256();
  // lanes with mask == 0 become all-ones; invert to select active lanes
  const __m256i is_zero = _mm256_cmpeq_epi64(bytes, zero);
  return _mm256_castsi256_pd(_mm256_xor_si256(is_zero, _mm256_set1_epi64x(-1)));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void masked_sgd_avx2(double* w, const double* g, const std::uint8_t* mask, double lr,
                     std::size_t n) {
  const __m256d vlr = _mm256_set1_pd(lr);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d sel = mask_lanes(mask + i);
    const __m256d step = _mm256_and_pd(sel, _mm256_mul_pd(vlr, _mm256_loadu_pd(g + i)));
    _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), step));
  }
  for (; i < n; ++i)
    if (mask[i]) w[i] -= lr * g[i];
}

void masked_adam_avx2(double* w, double* m, double* v, const double* g, const std::uint8_t* mask,
                      const AdamStep& st, std::size_t n) {
  const __m256d b1 = _mm256_set1_pd(st.beta1);
  const __m256d b1c = _mm256_set1_pd(1.0 - st.beta1);
  const __m256d b2 = _mm256_set1_pd(st.beta2);
  const __m256d b2c = _mm256_set1_pd(1.0 - st.beta2);
  const __m256d inv_bias1 = _mm256_set1_pd(1.0 / st.bias1);
  const __m256d inv_bias2 = _mm256_set1_pd(1.0 / st.bias2);
  const __m256d eps = _mm256_set1_pd(st.eps);
  const __m256d lr = _mm256_set1_pd(st.lr);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d sel = mask_lanes(mask + i);
    const __m256d gi = _mm256_loadu_pd(g + i);
    __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(b1c, gi));
    __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                               _mm256_mul_pd(b2c, _mm256_mul_pd(gi, gi)));
    mi = _mm256_and_pd(sel, mi);
    vi = _mm256_and_pd(sel, vi);
    const __m256d mhat = _mm256_mul_pd(mi, inv_bias1);
    const __m256d vhat = _mm256_mul_pd(vi, inv_bias2);
    const __m256d step =
        _mm256_div_pd(_mm256_mul_pd(lr, mhat), _mm256_add_pd(_mm256_sqrt_pd(vhat), eps));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), _mm256_and_pd(sel, step)));
  }
  for (; i < n; ++i) {
    if (!mask[i]) {
      m[i] = 0.0;
      v[i] = 0.0;
      continue;
    }
    m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g[i];
    v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g[i] * g[i];
    w[i] -= st.lr * (m[i] / st.bias1) / (std::sqrt(v[i] / st.bias2) + st.eps);
  }
}

void apply_mask_avx2(double* w, const std::uint8_t* mask, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(w + i, _mm256_and_pd(mask_lanes(mask + i), _mm256_loadu_pd(w + i)));
  for (; i < n; ++i)
    if (!mask[i]) w[i] = 0.0;
}

double masked_abs_sum_avx2(const double* w, const std::uint8_t* mask, std::size_t n) {
  const __m256d abs_bits = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_and_pd(abs_bits, _mm256_loadu_pd(w + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(mask_lanes(mask + i), a));
  }
  double s = hsum(acc);
  for (; i < n; ++i)
    if (!mask[i]) s += std::fabs(w[i]);
  return s;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Isa::kAvx2,      dot_avx2,        axpy_avx2,
                                 masked_sgd_avx2, masked_adam_avx2, apply_mask_avx2,
                                 masked_abs_sum_avx2};
  return table;
}

}  // namespace sparsescale::kernels::detail
