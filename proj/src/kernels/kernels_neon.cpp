#include <arm_neon.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace sparsescale::kernels::detail {
namespace {

inline uint64x2_t mask_lanes(const std::uint8_t* mask) {
  return vcombine_u64(vcreate_u64(mask[0] ? ~0ULL : 0ULL), vcreate_u64(mask[1] ? ~0ULL : 0ULL));
}

inline float64x2_t select(uint64x2_t sel, float64x2_t x) {
  return vreinterpretq_f64_u64(vandq_u64(sel, vreinterpretq_u64_f64(x)));
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void masked_sgd_neon(double* w, const double* g, const std::uint8_t* mask, double lr,
                     std::size_t n) {
  const float64x2_t vlr = vdupq_n_f64(lr);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t step = select(mask_lanes(mask + i), vmulq_f64(vlr, vld1q_f64(g + i)));
    vst1q_f64(w + i, vsubq_f64(vld1q_f64(w + i), step));
  }
  for (; i < n; ++i)
    if (mask[i]) w[i] -= lr * g[i];
}

void masked_adam_neon(double* w, double* m, double* v, const double* g, const std::uint8_t* mask,
                      const AdamStep& st, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t sel = mask_lanes(mask + i);
    const float64x2_t gi = vld1q_f64(g + i);
    float64x2_t mi = vaddq_f64(vmulq_n_f64(vld1q_f64(m + i), st.beta1),
                               vmulq_n_f64(gi, 1.0 - st.beta1));
    float64x2_t vi = vaddq_f64(vmulq_n_f64(vld1q_f64(v + i), st.beta2),
                               vmulq_n_f64(vmulq_f64(gi, gi), 1.0 - st.beta2));
    mi = select(sel, mi);
    vi = select(sel, vi);
    const float64x2_t mhat = vmulq_n_f64(mi, 1.0 / st.bias1);
    const float64x2_t vhat = vmulq_n_f64(vi, 1.0 / st.bias2);
    const float64x2_t step = vdivq_f64(vmulq_n_f64(mhat, st.lr),
                                       vaddq_f64(vsqrtq_f64(vhat), vdupq_n_f64(st.eps)));
    vst1q_f64(m + i, mi);
    vst1q_f64(v + i, vi);
    vst1q_f64(w + i, vsubq_f64(vld1q_f64(w + i), select(sel, step)));
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

void apply_mask_neon(double* w, const std::uint8_t* mask, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(w + i, select(mask_lanes(mask + i), vld1q_f64(w + i)));
  for (; i < n; ++i)
    if (!mask[i]) w[i] = 0.0;
}

double masked_abs_sum_neon(const double* w, const std::uint8_t* mask, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t pruned =
        vreinterpretq_u64_u32(vmvnq_u32(vreinterpretq_u32_u64(mask_lanes(mask + i))));
    acc = vaddq_f64(acc, select(pruned, vabsq_f64(vld1q_f64(w + i))));
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i)
    if (!mask[i]) s += std::fabs(w[i]);
  return s;
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{Isa::kNeon,      dot_neon,        axpy_neon,
                                 masked_sgd_neon, masked_adam_neon, apply_mask_neon,
                                 masked_abs_sum_neon};
  return table;
}

}  // namespace sparsescale::kernels::detail
