#pragma once

#include <cstdint>
#include <span>

#include "sparsescale/core/types.hpp"
#include "sparsescale/trainer/tiny_lm.hpp"

namespace sparsescale::trainer {

/// Keeps the `keep` largest-magnitude weights among the currently active ones
/// (mask != 0) and clears the mask of the rest, zeroing them. Ties in magnitude
/// keep the lower index. Throws ConfigError if keep < 0 or keep exceeds the
/// active count.
void magnitude_prune(std::span<double> weights, std::span<std::uint8_t> mask, Count keep);

/// Global magnitude pruning across all prunable tensors of the model jointly.
void global_magnitude_prune(TinyLM& model, Count target_remaining);

}  // namespace sparsescale::trainer
