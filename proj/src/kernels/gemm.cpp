#include <algorithm>

#include "sparsescale/kernels/kernels.hpp"

namespace sparsescale::kernels {

void gemm_abt(const KernelTable& kt, const double* a, const double* b, double* c, std::size_t m,
              std::size_t n, std::size_t k, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double s = kt.dot(ai, b + j * k, k);
      ci[j] = accumulate ? ci[j] + s : s;
    }
  }
}

void gemm_atb_acc(const KernelTable& kt, const double* a, const double* b, double* c,
                  std::size_t m, std::size_t n, std::size_t k) {
  // Output row outermost so it stays in cache while the m input rows stream
  // past; each element still accumulates in ascending r.
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = c + i * k;
    for (std::size_t r = 0; r < m; ++r) {
      const double ari = a[r * n + i];
      if (ari != 0.0) kt.axpy(ari, b + r * k, ci, k);
    }
  }
}

void gemm_ab(const KernelTable& kt, const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k) {
  std::fill(c, c + m * k, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * n;
    double* ci = c + i * k;
    for (std::size_t j = 0; j < n; ++j)
      if (ai[j] != 0.0) kt.axpy(ai[j], b + j * k, ci, k);
  }
}

}  // namespace sparsescale::kernels
