#include "sparsescale/core/schedule.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sparsescale/core/errors.hpp"

namespace sparsescale {
namespace {

// Whole steps of cost `cost` that fit into `budget`. A relative slack of 1e-12
// keeps exactly divisible budgets from losing a step to rounding.
Count whole_steps(double budget, double cost) {
  if (budget <= 0.0) return 0;
  auto steps = static_cast<Count>(std::floor(budget / cost));
  if (static_cast<double>(steps + 1) * cost <= budget * (1.0 + 1e-12)) ++steps;
  while (steps > 0 && static_cast<double>(steps) * cost > budget * (1.0 + 1e-12)) --steps;
  return steps;
}

struct DensePlan {
  Count steps = 0;
  double carry = 0.0;
};

DensePlan plan_dense(const SparsityScheduleConfig& cfg) {
  const double cost = step_compute(active_params_for(cfg, cfg.shape.prunable), cfg.tokens_per_step);
  const double budget = cfg.dense_fraction * cfg.total_compute;
  DensePlan plan;
  plan.steps = whole_steps(budget, cost);
  plan.carry = budget - static_cast<double>(plan.steps) * cost;
  return plan;
}

// Exact (pre-rounding) gap between the last two prunable counts of a K-iteration
// plan; K iterations keep counts strictly decreasing whenever this exceeds one.
bool removes_a_weight_every_iteration(const SparsityScheduleConfig& cfg, Count k_iters) {
  const double p0 = static_cast<double>(cfg.shape.prunable);
  const double keep = 1.0 - cfg.target_sparsity;
  if (k_iters == 1) return cfg.shape.prunable - final_prunable(cfg) >= 1;
  const double before_last = p0 * std::pow(keep, static_cast<double>(k_iters - 1) / static_cast<double>(k_iters));
  return before_last - p0 * keep > 1.0;
}

std::string describe_budget(double budget, double needed) {
  std::ostringstream os;
  os << "pruning phase budget " << budget << " FLOPs cannot fit one iteration (needs " << needed
     << " FLOPs)";
  return os.str();
}

}  // namespace

SparsityScheduleConfig canonical_schedule() {
  SparsityScheduleConfig cfg;
  cfg.shape = {138'000'000, 0};
  cfg.target_sparsity = 0.8;
  cfg.dense_fraction = 0.25;
  cfg.prune_fraction = 0.5;
  cfg.steps_per_iteration = 100;
  cfg.tokens_per_step = 500'000;
  cfg.total_compute = 6.0 * 138e6 * 33.5e9;
  cfg.accounting = Accounting::kPrunableOnly;
  return cfg;
}

double step_compute(Count active, Count tokens_per_step) {
  return 6.0 * static_cast<double>(active) * static_cast<double>(tokens_per_step);
}

Count active_params_for(const SparsityScheduleConfig& cfg, Count prunable) {
  return prunable + (cfg.accounting == Accounting::kAllParams ? cfg.shape.nonprunable : 0);
}

Count final_prunable(const SparsityScheduleConfig& cfg) {
  return std::llround(static_cast<double>(cfg.shape.prunable) * (1.0 - cfg.target_sparsity));
}

Count iteration_prunable(const SparsityScheduleConfig& cfg, Count k, Count iterations) {
  if (k >= iterations) return final_prunable(cfg);
  const double frac = static_cast<double>(k) / static_cast<double>(iterations);
  return std::llround(static_cast<double>(cfg.shape.prunable) * std::pow(1.0 - cfg.target_sparsity, frac));
}

double pruning_phase_compute(const SparsityScheduleConfig& cfg, Count iterations) {
  double total = 0.0;
  const double steps = static_cast<double>(cfg.steps_per_iteration);
  for (Count k = 1; k <= iterations; ++k) {
    const Count active = active_params_for(cfg, iteration_prunable(cfg, k, iterations));
    total += steps * step_compute(active, cfg.tokens_per_step);
  }
  return total;
}

IterationPlan solve_iterations(const SparsityScheduleConfig& cfg) {
  cfg.validate();
  if (cfg.target_sparsity <= 0.0)
    throw std::invalid_argument("solve_iterations requires target_sparsity > 0");
  if (cfg.prune_fraction <= 0.0)
    throw InfeasibleError("target_sparsity > 0 but prune_fraction is 0: no compute for pruning");
  if (final_prunable(cfg) >= cfg.shape.prunable)
    throw InfeasibleError("target_sparsity rounds to zero removed prunable parameters");

  IterationPlan plan;
  plan.budget = cfg.prune_fraction * cfg.total_compute + plan_dense(cfg).carry;

  const double one = pruning_phase_compute(cfg, 1);
  if (one > plan.budget) throw InfeasibleError(describe_budget(plan.budget, one));

  // Each iteration costs at least P steps at the final size, which bounds K.
  const double cheapest = static_cast<double>(cfg.steps_per_iteration) *
                          step_compute(active_params_for(cfg, final_prunable(cfg)), cfg.tokens_per_step);
  Count hi = std::max<Count>(1, static_cast<Count>(std::floor(plan.budget / cheapest)));

  // Largest K that still removes a weight per iteration (monotone in K).
  if (!removes_a_weight_every_iteration(cfg, hi)) {
    Count lo = 1;
    while (lo < hi) {
      const Count mid = lo + (hi - lo + 1) / 2;
      if (removes_a_weight_every_iteration(cfg, mid)) lo = mid;
      else hi = mid - 1;
    }
  }

  // Pruning-phase compute is nondecreasing in K.
  Count lo = 1;
  while (lo < hi) {
    const Count mid = lo + (hi - lo + 1) / 2;
    if (pruning_phase_compute(cfg, mid) <= plan.budget) lo = mid;
    else hi = mid - 1;
  }
  plan.iterations = lo;
  plan.removal_fraction =
      1.0 - std::pow(1.0 - cfg.target_sparsity, 1.0 / static_cast<double>(plan.iterations));
  plan.compute = pruning_phase_compute(cfg, plan.iterations);
  return plan;
}

ParamTrajectory build_schedule(const SparsityScheduleConfig& cfg) {
  cfg.validate();
  ParamTrajectory traj;
  traj.shape = cfg.shape;
  traj.accounting = cfg.accounting;
  traj.tokens_per_step = cfg.tokens_per_step;

  const Count tps = cfg.tokens_per_step;
  auto push = [&](Phase phase, Count prunable, Count steps) {
    Segment s;
    s.phase = phase;
    s.prunable_active = prunable;
    s.active_params = active_params_for(cfg, prunable);
    s.steps = steps;
    s.tokens = steps * tps;
    traj.segments.push_back(s);
  };

  const Count start = cfg.shape.prunable;
  if (cfg.target_sparsity == 0.0) {
    const double cost = step_compute(active_params_for(cfg, start), tps);
    const Count steps = whole_steps(cfg.total_compute, cost);
    if (steps == 0) throw InfeasibleError("total_compute is smaller than one training step");
    push(Phase::kDense, start, steps);
    return traj;
  }

  const DensePlan dense = plan_dense(cfg);
  if (dense.steps > 0) push(Phase::kDense, start, dense.steps);

  const IterationPlan plan = solve_iterations(cfg);
  for (Count k = 1; k <= plan.iterations; ++k)
    push(Phase::kPrune, iteration_prunable(cfg, k, plan.iterations), cfg.steps_per_iteration);

  const Count end = final_prunable(cfg);
  const double final_cost = step_compute(active_params_for(cfg, end), tps);
  const double leftover = plan.budget - plan.compute;
  const Count extra = whole_steps(leftover, final_cost);
  if (extra > 0) {
    traj.segments.back().steps += extra;
    traj.segments.back().tokens += extra * tps;
  }
  const double carry = leftover - static_cast<double>(extra) * final_cost;

  const double recover_budget = std::max(0.0, cfg.recover_fraction()) * cfg.total_compute + carry;
  const Count recover_steps = whole_steps(recover_budget, final_cost);
  if (recover_steps > 0) push(Phase::kRecover, end, recover_steps);
  return traj;
}

double average_params(const ParamTrajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("average_params of an empty trajectory");
  double weighted = 0.0;
  double tokens = 0.0;
  for (const auto& s : traj.segments) {
    weighted += static_cast<double>(s.active_params) * static_cast<double>(s.tokens);
    tokens += static_cast<double>(s.tokens);
  }
  return weighted / tokens;
}

double effective_compute(const ParamTrajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("effective_compute of an empty trajectory");
  double weighted = 0.0;
  for (const auto& s : traj.segments)
    weighted += static_cast<double>(s.active_params) * static_cast<double>(s.tokens);
  return 6.0 * weighted;
}

ModelShape match_dense(const ParamTrajectory& traj) {
  const Count avg = std::llround(average_params(traj));
  ModelShape shape;
  shape.nonprunable = traj.shape.nonprunable;
  shape.prunable = traj.accounting == Accounting::kAllParams ? avg - traj.shape.nonprunable : avg;
  if (shape.prunable <= 0)
    throw InfeasibleError("average parameter count does not exceed the nonprunable parameters");
  return shape;
}

double compression_rate(const ParamTrajectory& traj) {
  return average_params(traj) / static_cast<double>(traj.final_active());
}

}  // namespace sparsescale
