#include <cmath>

#include "kernels_internal.hpp"

namespace sparsescale::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void masked_sgd_scalar(double* w, const double* g, const std::uint8_t* mask, double lr,
                       std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) w[i] -= lr * g[i];
}

void masked_adam_scalar(double* w, double* m, double* v, const double* g, const std::uint8_t* mask,
                        const AdamStep& st, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) {
      m[i] = 0.0;
      v[i] = 0.0;
      continue;
    }
    m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g[i];
    v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g[i] * g[i];
    const double mhat = m[i] / st.bias1;
    const double vhat = v[i] / st.bias2;
    w[i] -= st.lr * mhat / (std::sqrt(vhat) + st.eps);
  }
}

void apply_mask_scalar(double* w, const std::uint8_t* mask, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!mask[i]) w[i] = 0.0;
}

double masked_abs_sum_scalar(const double* w, const std::uint8_t* mask, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (!mask[i]) s += std::fabs(w[i]);
  return s;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::kScalar,       dot_scalar,        axpy_scalar,
                                 masked_sgd_scalar,  masked_adam_scalar, apply_mask_scalar,
                                 masked_abs_sum_scalar};
  return table;
}

}  // namespace sparsescale::kernels
