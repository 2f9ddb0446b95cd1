#pragma once

// Data-parallel inner loops of the trainer. Every kernel has a scalar reference
// implementation; AVX2 (x86-64) and NEON (aarch64) variants are compiled in
// separate translation units and picked at runtime. The SIMD variants reorder
// floating-point sums, so they agree with the scalar path to rounding, not
// bit-for-bit. A single run always uses one table, so results stay reproducible
// for a fixed ISA.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace sparsescale::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa);

struct AdamStep {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double bias1 = 1.0;  // 1 - beta1^t
  double bias2 = 1.0;  // 1 - beta2^t
};

struct KernelTable {
  Isa isa = Isa::kScalar;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n) = nullptr;
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n) = nullptr;
  // w[i] -= lr * g[i] where mask[i] != 0; masked entries are left untouched
  void (*masked_sgd)(double* w, const double* g, const std::uint8_t* mask, double lr,
                     std::size_t n) = nullptr;
  // Adam moment update and step on unmasked entries; masked moments are zeroed
  void (*masked_adam)(double* w, double* m, double* v, const double* g, const std::uint8_t* mask,
                      const AdamStep& step, std::size_t n) = nullptr;
  // w[i] = 0 where mask[i] == 0
  void (*apply_mask)(double* w, const std::uint8_t* mask, std::size_t n) = nullptr;
  // sum |w[i]| over positions with mask[i] == 0
  double (*masked_abs_sum)(const double* w, const std::uint8_t* mask, std::size_t n) = nullptr;
};

const KernelTable& scalar_kernels();

/// SIMD table for `isa`, or nullptr if it was not compiled in or the CPU lacks it.
const KernelTable* kernels_for(Isa isa);

/// All tables usable on this machine, scalar first.
std::vector<const KernelTable*> available_kernels();

/// Best available table. The SPARSESCALE_ISA environment variable
/// (scalar|avx2|neon) overrides the choice when that ISA is available.
const KernelTable& active_kernels();

// Row-major dense products built on a kernel table.

/// c[m x n] = a[m x k] * b[n x k]^T (+ c when accumulate)
void gemm_abt(const KernelTable& kt, const double* a, const double* b, double* c, std::size_t m,
              std::size_t n, std::size_t k, bool accumulate = false);

/// c[n x k] += a[m x n]^T * b[m x k]
void gemm_atb_acc(const KernelTable& kt, const double* a, const double* b, double* c,
                  std::size_t m, std::size_t n, std::size_t k);

/// c[m x k] = a[m x n] * b[n x k]
void gemm_ab(const KernelTable& kt, const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k);

}  // namespace sparsescale::kernels
