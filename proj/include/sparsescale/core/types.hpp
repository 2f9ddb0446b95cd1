#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sparsescale {

using Count = std::int64_t;

/// Parameter split of a starting model. Only linear-layer weights are prunable;
/// embeddings, biases and normalization parameters stay dense.
struct ModelShape {
  Count prunable = 0;
  Count nonprunable = 0;

  Count total() const { return prunable + nonprunable; }
  void validate() const;

  bool operator==(const ModelShape&) const = default;
};

/// Whether nonprunable parameters count toward the active parameter total.
enum class Accounting { kAllParams, kPrunableOnly };

std::string_view to_string(Accounting a);
Accounting accounting_from_string(std::string_view s);

enum class Phase { kDense, kPrune, kRecover };

std::string_view to_string(Phase p);

/// Declarative three-phase sparse pre-training run. Phase lengths are given as
/// fractions of `total_compute`; the recovery phase receives the remainder.
struct SparsityScheduleConfig {
  ModelShape shape;
  double target_sparsity = 0.0;
  double dense_fraction = 0.25;
  double prune_fraction = 0.5;
  Count steps_per_iteration = 100;
  Count tokens_per_step = 1;
  double total_compute = 0.0;
  Accounting accounting = Accounting::kAllParams;

  double recover_fraction() const { return 1.0 - dense_fraction - prune_fraction; }
  void validate() const;
};

/// A stretch of training at constant active parameter count.
struct Segment {
  Count active_params = 0;
  Count tokens = 0;
  Count steps = 0;
  Count prunable_active = 0;  // surviving prunable weights during the segment
  Phase phase = Phase::kDense;

  bool operator==(const Segment&) const = default;
};

/// Materialized sequence of (active parameters, tokens) segments.
struct ParamTrajectory {
  ModelShape shape;
  Accounting accounting = Accounting::kAllParams;
  Count tokens_per_step = 1;
  std::vector<Segment> segments;

  bool empty() const { return segments.empty(); }
  Count total_tokens() const;
  Count final_active() const;
  Count initial_active() const;

  /// Builds a trajectory directly from (active_params, tokens) pairs, treating
  /// every parameter as prunable. Mostly useful for hand-built examples.
  static ParamTrajectory from_pairs(const std::vector<std::pair<Count, Count>>& pairs);
};

enum class RunSource { kMeasured, kSimulated };

std::string_view to_string(RunSource s);
RunSource run_source_from_string(std::string_view s);

/// One completed or simulated training run.
struct RunRecord {
  std::string label;
  double avg_params = 0.0;
  double total_tokens = 0.0;
  double final_loss = 0.0;
  double sparsity = 0.0;
  double final_nonzero_params = 0.0;
  ModelShape shape;
  RunSource source = RunSource::kMeasured;

  void validate() const;
  bool operator==(const RunRecord&) const = default;
};

}  // namespace sparsescale
