#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "sparsescale/core/types.hpp"
#include "sparsescale/trainer/corpus.hpp"
#include "sparsescale/trainer/optimizer.hpp"
#include "sparsescale/trainer/tiny_lm.hpp"

namespace sparsescale::trainer {

struct TrainConfig {
  TinyLMConfig model;
  // Sparsity schedule. `shape` is taken from the model and `tokens_per_step`
  // from batch_size, so only sparsity, phase fractions, P, total_compute and
  // accounting are read from here.
  SparsityScheduleConfig schedule;
  OptimizerConfig optimizer;
  Count batch_size = 64;  // examples (= predicted tokens) per step
  std::uint64_t seed = 0;
  std::int64_t log_every = 50;        // steps between curve points
  std::size_t eval_examples = 2048;   // held-out examples per curve point (0 = all)
  std::string label;
};

struct CurvePoint {
  std::int64_t step = 0;
  Count tokens = 0;
  double compute = 0.0;    // effective compute so far, 6 * sum(N_k * d_k)
  Count active_params = 0;
  double train_loss = 0.0; // mean over the steps since the previous point
  double eval_loss = 0.0;  // on a held-out subsample
};

/// Called after every optimizer step; `pruned` is true when the step followed a
/// pruning event.
struct StepEvent {
  std::int64_t step = 0;
  Phase phase = Phase::kDense;
  bool pruned = false;
  Count target_prunable = 0;  // prunable weights the schedule prescribes now
  const TinyLM* model = nullptr;
};

struct TrainResult {
  RunRecord record;
  ParamTrajectory planned;   // from core
  ParamTrajectory executed;  // (active params, tokens) actually trained
  std::vector<CurvePoint> curve;
  double final_eval_loss = 0.0;   // on the full held-out split
  double final_train_loss = 0.0;  // mean over the last logging window
  Count pruning_events = 0;
};

/// Builds the schedule for `cfg` and the given model shape.
SparsityScheduleConfig resolved_schedule(const TrainConfig& cfg);

/// Runs dense training, iterative global magnitude pruning and sparse recovery
/// as materialized by the schedule, single-threaded and deterministic for a
/// seed. The returned record's avg_params equals average_params(executed).
TrainResult run_sparse_pretraining(const TrainConfig& cfg, const Corpus& corpus,
                                   const std::function<void(const StepEvent&)>& on_step = {},
                                   TinyLM* final_model = nullptr);

/// Same architecture with the hidden width whose prunable count is closest to
/// `target_prunable` (the dense counterpart of a sparse run).
TinyLMConfig match_dense_model(const TinyLMConfig& base, Count target_prunable);

/// Dense counterpart of a finished sparse run: a model whose prunable count is
/// closest to the sparse run's average, trained with S = 0 for the same
/// effective compute as the sparse run executed.
TrainConfig matched_dense_config(const TrainConfig& sparse_cfg, const TrainResult& sparse_result);

/// Samples `examples` (context, target) pairs uniformly from `tokens`.
Batch sample_batch(std::span<const int> tokens, int context, std::size_t examples,
                   std::mt19937_64& rng);

}  // namespace sparsescale::trainer
