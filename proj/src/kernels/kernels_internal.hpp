#pragma once

#include "sparsescale/kernels/kernels.hpp"

namespace sparsescale::kernels::detail {

#if defined(SPARSESCALE_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

#if defined(SPARSESCALE_HAVE_NEON)
const KernelTable& neon_table();
#endif

}  // namespace sparsescale::kernels::detail
