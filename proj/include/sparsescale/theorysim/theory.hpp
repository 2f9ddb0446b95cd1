#pragma once

#include <iosfwd>
#include <vector>

#include "sparsescale/core/types.hpp"

namespace sparsescale::theorysim {

/// L(C) = (A / C)^alpha.
struct TheoryParams {
  double A = 1.0;
  double alpha = 0.1;

  void validate() const;
};

double loss_of_compute(const TheoryParams& p, double compute);

/// First-order change of L when compute grows from C to C + dC:
/// -alpha A^alpha C^(-alpha-1) dC.
double delta_loss(const TheoryParams& p, double compute_prefix, double delta_compute);

struct SimulationOptions {
  // Share of the trajectory's own compute skipped at the start. The loss is
  // pinned to the closed form at the end of the burn-in, where the single power
  // law is assumed to start holding.
  double burn_in_fraction = 0.026;
  // Absolute compute spent before the trajectory starts (e.g. the compute of a
  // model that is further trained). Large offsets give the flat-coefficient
  // regime in which C^(-alpha-1) barely changes across the trajectory.
  double initial_compute = 0.0;
  // Upper bound on one Euler increment, as a share of the trajectory compute.
  double max_increment_fraction = 1e-4;
  // FLOPs per active parameter per token.
  double flops_per_param_token = 6.0;
};

struct CurvePoint {
  double compute = 0.0;  // absolute cumulative compute (offset included)
  double loss = 0.0;
};

struct SimulationResult {
  std::vector<CurvePoint> curve;   // starts at the end of the burn-in
  double total_delta_loss = 0.0;   // sum of first-order changes (negative)
  double start_compute = 0.0;
  double total_compute = 0.0;      // compute of the trajectory itself
};

/// Integrates the first-order loss change over the trajectory, segment by
/// segment, with each segment's compute 6 N_k d_k split into increments no
/// larger than max_increment_fraction of the trajectory compute. Pruning spikes
/// are not modeled. Throws IllPosedError for an empty trajectory or when the
/// starting compute (offset plus burn-in) is zero, where L(C) is singular.
SimulationResult simulate_trajectory(const TheoryParams& p, const ParamTrajectory& traj,
                                     const SimulationOptions& options = {});

/// Per segment k (1-based), (offset + cumulative compute through segment k)^(-alpha-1),
/// divided by the first value.
std::vector<double> coefficient_series(const TheoryParams& p, const ParamTrajectory& traj,
                                       const SimulationOptions& options = {});

/// (max - min) / mean over series[from_index, end). Throws IllPosedError when
/// the range is empty.
double flatness(const std::vector<double>& series, std::size_t from_index = 0);

struct PiecewiseAlpha {
  double alpha_before = 0.0;
  double alpha_after = 0.0;
};

/// Negated least-squares slopes of log loss against log compute for the points
/// strictly below and at-or-above the breakpoint. Throws IllPosedError when a
/// side has fewer than 3 points.
PiecewiseAlpha fit_piecewise_alpha(const std::vector<CurvePoint>& curve, double breakpoint);

/// CSV with header `cumulative_compute,loss`.
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace sparsescale::theorysim
