#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sparsescale/core/types.hpp"
#include "sparsescale/kernels/kernels.hpp"

namespace sparsescale::trainer {

struct TinyLMConfig {
  int vocab = 75;
  int context = 8;   // characters of left context
  int embed = 16;    // embedding width per context character
  int hidden = 224;  // width of both hidden layers
  // Output weights are drawn at this multiple of their Glorot scale; 0 gives
  // exactly uniform initial predictions.
  double output_init_scale = 0.1;

  void validate() const;
};

/// One training example: `context` token ids followed by the target id.
struct Batch {
  int context = 0;
  std::vector<int> inputs;   // size = examples * context, row-major
  std::vector<int> targets;  // size = examples

  std::size_t size() const { return targets.size(); }
};

/// Feed-forward next-character model:
///   embedding -> tanh(W1 x + b1) -> tanh(W2 h + b2) -> W3 h + b3 -> softmax.
///
/// All parameters live in one flat array. The prunable block (W1, W2, W3, all
/// row-major) comes first, so a weight's global pruning index is its position
/// in that array; embeddings and biases follow and are never pruned. Masks are
/// one byte per prunable weight (1 = active).
class TinyLM {
 public:
  TinyLM(const TinyLMConfig& cfg, std::uint64_t seed,
         const kernels::KernelTable& kt = kernels::active_kernels());

  const TinyLMConfig& config() const { return cfg_; }
  const kernels::KernelTable& kernels() const { return *kt_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::span<std::uint8_t> mask() { return mask_; }
  std::span<const std::uint8_t> mask() const { return mask_; }

  Count prunable_count() const { return static_cast<Count>(mask_.size()); }
  Count nonprunable_count() const {
    return static_cast<Count>(params_.size()) - prunable_count();
  }
  ModelShape shape() const { return {prunable_count(), nonprunable_count()}; }
  Count active_prunable() const;

  /// Mean cross-entropy over the batch; writes d(loss)/d(params) into `grad`
  /// (resized to the parameter count) when non-null. Gradients of pruned
  /// weights are reported as zero. Throws ConfigError on shape mismatch.
  double loss_and_gradient(const Batch& batch, std::vector<double>* grad) const;

  /// Zeroes every weight whose mask bit is clear.
  void apply_mask();

  /// Replaces parameters and mask (used by checkpoint loading).
  void assign(std::vector<double> params, std::vector<std::uint8_t> mask);

  // Offsets into the flat parameter array.
  std::size_t w1_offset() const { return 0; }
  std::size_t w2_offset() const { return w1_size(); }
  std::size_t w3_offset() const { return w1_size() + w2_size(); }
  std::size_t emb_offset() const { return mask_.size(); }
  std::size_t b1_offset() const { return emb_offset() + emb_size(); }
  std::size_t b2_offset() const { return b1_offset() + cfg_.hidden; }
  std::size_t b3_offset() const { return b2_offset() + cfg_.hidden; }

  /// Parameter count of a model with this configuration, split by prunability.
  static ModelShape shape_of(const TinyLMConfig& cfg);

 private:
  std::size_t in_width() const { return static_cast<std::size_t>(cfg_.context * cfg_.embed); }
  std::size_t w1_size() const { return static_cast<std::size_t>(cfg_.hidden) * in_width(); }
  std::size_t w2_size() const { return static_cast<std::size_t>(cfg_.hidden) * cfg_.hidden; }
  std::size_t w3_size() const { return static_cast<std::size_t>(cfg_.vocab) * cfg_.hidden; }
  std::size_t emb_size() const { return static_cast<std::size_t>(cfg_.vocab) * cfg_.embed; }

  TinyLMConfig cfg_;
  const kernels::KernelTable* kt_;
  std::vector<double> params_;
  std::vector<std::uint8_t> mask_;
};

/// Mean next-character cross-entropy over every position of `tokens` that has
/// a full left context, evaluating at most `max_examples` evenly strided
/// positions (0 = all). Deterministic. Throws IllPosedError if no position
/// qualifies.
double eval_loss(const TinyLM& model, std::span<const int> tokens, std::size_t max_examples = 0);

}  // namespace sparsescale::trainer
