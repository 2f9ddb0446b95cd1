#pragma once

#include <filesystem>
#include <iosfwd>

#include "sparsescale/trainer/tiny_lm.hpp"

namespace sparsescale::trainer {

// Checkpoint layout (all integers and floats little-endian):
//   bytes 0-3   magic "SSLM"
//   u32         format version (1)
//   u32 x 4     vocab, context, embed, hidden
//   u64         parameter count P, then P x f64 parameters in flat order
//               (W1, W2, W3 row-major, embedding, b1, b2, b3)
//   u64         prunable count M, then ceil(M/8) bytes of mask bits, weight i
//               in byte i/8 at bit i%8 (least significant bit first)

void save_checkpoint(std::ostream& out, const TinyLM& model);
void save_checkpoint(const std::filesystem::path& path, const TinyLM& model);

/// Throws SchemaError on a bad magic, version, or truncated file.
TinyLM load_checkpoint(std::istream& in, const kernels::KernelTable& kt = kernels::active_kernels());
TinyLM load_checkpoint(const std::filesystem::path& path,
                       const kernels::KernelTable& kt = kernels::active_kernels());

}  // namespace sparsescale::trainer
