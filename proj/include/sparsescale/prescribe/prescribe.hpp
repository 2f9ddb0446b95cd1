#pragma once

#include "sparsescale/core/types.hpp"
#include "sparsescale/lawfit/law.hpp"

namespace sparsescale::prescribe {

/// A (model size, token count) choice that reaches a target loss.
struct Prescription {
  double avg_params = 0.0;    // N̄ (equals the model size when dense)
  double final_params = 0.0;  // N_f = N̄ / r, the served model
  double tokens = 0.0;        // D
  double sparsity = 0.0;
  double compression = 1.0;  // r
  double inference_tokens = 0.0;
  double train_flops = 0.0;      // 6 N̄ D
  double inference_flops = 0.0;  // 2 N_f T_inf
  double lifetime_flops = 0.0;
  double achieved_loss = 0.0;
};

/// 6 N̄ D + 2 N_f T_inf.
double lifetime_flops(double avg_params, double tokens, double final_params,
                      double inference_tokens);

/// Smallest N̄ for which the target is reachable with finite data:
/// (A / (target - E))^(1/alpha). Throws InfeasibleError when target <= E.
double min_avg_params(const lawfit::ScalingLawFit& fit, double target_loss);

/// Tokens that reach `target_loss` at `avg_params` (closed form of the loss
/// constraint). Throws InfeasibleError if no finite token count suffices.
double tokens_for_loss(const lawfit::ScalingLawFit& fit, double target_loss, double avg_params);

/// Minimizes training compute 6 N D subject to L(N, D) = target. The returned
/// prescription also carries inference FLOPs for `inference_tokens` served by the
/// dense model (accounting only; it does not affect the optimum).
Prescription solve_chinchilla(const lawfit::ScalingLawFit& fit, double target_loss,
                              double inference_tokens = 0.0);

/// Minimizes 6 N̄ D + 2 (N̄ / r) T_inf subject to L(N̄, D) = target.
/// Throws InfeasibleError when target <= E and ConfigError for T_inf < 0,
/// r < 1 or sparsity outside [0, 1).
Prescription solve_lifetime(const lawfit::ScalingLawFit& fit, double target_loss,
                            double inference_tokens, double sparsity, double compression);

/// Dense and sparse lifetime-optimal prescriptions at the same target and traffic.
struct LifetimeComparison {
  Prescription dense;
  Prescription sparse;
  double saving = 0.0;  // 1 - sparse.lifetime_flops / dense.lifetime_flops
};

LifetimeComparison compare_lifetime(const lawfit::ScalingLawFit& fit, double target_loss,
                                    double inference_tokens, double sparsity, double compression);

/// Compression rate of the schedule `base` run at `sparsity` (all other schedule
/// fields kept). Returns 1 for sparsity 0.
double schedule_compression(const SparsityScheduleConfig& base, double sparsity);

}  // namespace sparsescale::prescribe
