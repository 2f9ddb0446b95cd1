#pragma once

#include "sparsescale/core/types.hpp"

namespace sparsescale {

/// Number of pruning iterations and the per-iteration removal fraction.
struct IterationPlan {
  Count iterations = 0;
  double removal_fraction = 0.0;  // fraction of the remaining prunable weights removed per iteration
  double budget = 0.0;            // FLOPs available to the pruning phase
  double compute = 0.0;           // FLOPs consumed by `iterations` full iterations
};

/// The reference schedule: 25% dense, 50% pruning to 80% sparsity in 100-step
/// iterations, 25% recovery, prunable-only accounting, on a 138M-parameter model
/// trained for 33.5B tokens at 0.5M tokens per step.
SparsityScheduleConfig canonical_schedule();

/// FLOPs of one optimizer step at `active` parameters: 6 * active * tokens_per_step.
double step_compute(Count active, Count tokens_per_step);

/// Active parameter count for a given number of surviving prunable weights.
Count active_params_for(const SparsityScheduleConfig& cfg, Count prunable);

/// Surviving prunable weights after the final pruning iteration.
Count final_prunable(const SparsityScheduleConfig& cfg);

/// Surviving prunable weights after iteration k (1-based) of a K-iteration plan.
/// The last iteration snaps to final_prunable(cfg).
Count iteration_prunable(const SparsityScheduleConfig& cfg, Count k, Count iterations);

/// FLOPs consumed by `iterations` full pruning iterations of P steps each.
double pruning_phase_compute(const SparsityScheduleConfig& cfg, Count iterations);

/// Largest K whose K full iterations fit the pruning-phase budget (including
/// the carry left over from quantizing the dense phase to whole steps), subject
/// to every iteration removing at least one weight.
/// Throws InfeasibleError when not even one iteration fits.
IterationPlan solve_iterations(const SparsityScheduleConfig& cfg);

/// Materializes the dense / pruning / recovery trajectory of `cfg`.
///
/// Every phase is quantized to whole steps. The dense phase runs at the full
/// model size. The pruning phase runs K iterations of P steps; any budget left
/// after the K-th iteration is spent as extra steps at the final size inside that
/// iteration. The recovery phase receives its own fraction plus all carry.
ParamTrajectory build_schedule(const SparsityScheduleConfig& cfg);

/// Token-weighted mean active parameter count.
double average_params(const ParamTrajectory& traj);

/// 6 * sum(N_k * d_k).
double effective_compute(const ParamTrajectory& traj);

/// Dense shape with total parameters equal to the rounded average of `traj`,
/// keeping the nonprunable count of the starting model.
ModelShape match_dense(const ParamTrajectory& traj);

/// average_params / final active parameters.
double compression_rate(const ParamTrajectory& traj);

}  // namespace sparsescale
