#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sparsescale/kernels/kernels.hpp"

namespace sparsescale::trainer {

enum class OptimizerKind { kSgd, kAdam };
enum class LrSchedule { kConstant, kWarmupCosine };

std::string_view to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(std::string_view s);
std::string_view to_string(LrSchedule s);
LrSchedule lr_schedule_from_string(std::string_view s);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgd;
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  LrSchedule schedule = LrSchedule::kConstant;
  std::int64_t warmup_steps = 0;
  double min_lr_fraction = 0.1;  // cosine floor as a share of learning_rate
};

/// Masked first-order optimizer over a flat parameter array whose first
/// `prunable` entries are governed by a mask. Plain gradient descent by default;
/// Adam keeps per-parameter moments, which are zeroed for pruned weights at
/// every pruning event.
class Optimizer {
 public:
  Optimizer(const OptimizerConfig& cfg, std::size_t params, std::size_t prunable,
            std::int64_t total_steps);

  double learning_rate_at(std::int64_t step) const;

  /// One update at (0-based) step index `step`.
  void step(const kernels::KernelTable& kt, std::span<double> params,
            std::span<const double> grad, std::span<const std::uint8_t> mask, std::int64_t step);

  /// Clears optimizer state of weights whose mask bit is now clear.
  void on_prune(std::span<const std::uint8_t> mask);

  const OptimizerConfig& config() const { return cfg_; }

 private:
  OptimizerConfig cfg_;
  std::size_t prunable_;
  std::int64_t total_steps_;
  std::int64_t adam_t_ = 0;
  std::vector<double> m_, v_;
  std::vector<std::uint8_t> ones_;  // mask for the nonprunable block
};

}  // namespace sparsescale::trainer
