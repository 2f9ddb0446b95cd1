#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"

namespace sparsescale::kernels {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

const KernelTable* kernels_for(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &scalar_kernels();
    case Isa::kAvx2:
#if defined(SPARSESCALE_HAVE_AVX2)
      if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return &detail::avx2_table();
#endif
      return nullptr;
    case Isa::kNeon:
#if defined(SPARSESCALE_HAVE_NEON)
      // Advanced SIMD is mandatory on aarch64.
      return &detail::neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::vector<const KernelTable*> available_kernels() {
  std::vector<const KernelTable*> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon})
    if (const KernelTable* t = kernels_for(isa)) out.push_back(t);
  return out;
}

namespace {

const KernelTable& choose() {
  const auto tables = available_kernels();
  if (const char* forced = std::getenv("SPARSESCALE_ISA")) {
    const std::string want(forced);
    for (const KernelTable* t : tables)
      if (to_string(t->isa) == want) return *t;
  }
  return *tables.back();
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& table = choose();
  return table;
}

}  // namespace sparsescale::kernels
