#include "sparsescale/prescribe/prescribe.hpp"

#include <cmath>
#include <string>

#include "sparsescale/core/errors.hpp"
#include "sparsescale/core/schedule.hpp"

namespace sparsescale::prescribe {

using lawfit::ScalingLawFit;

double lifetime_flops(double avg_params, double tokens, double final_params,
                      double inference_tokens) {
  return 6.0 * avg_params * tokens + 2.0 * final_params * inference_tokens;
}

double min_avg_params(const ScalingLawFit& fit, double target_loss) {
  if (!(target_loss > fit.E))
    throw InfeasibleError("target loss " + std::to_string(target_loss) +
                          " is not above the irreducible loss E = " + std::to_string(fit.E));
  return std::pow(fit.A / (target_loss - fit.E), 1.0 / fit.alpha);
}

double tokens_for_loss(const ScalingLawFit& fit, double target_loss, double avg_params) {
  const double data_term = target_loss - fit.E - fit.A / std::pow(avg_params, fit.alpha);
  if (!(data_term > 0.0))
    throw InfeasibleError("a model with " + std::to_string(avg_params) +
                          " average parameters cannot reach loss " + std::to_string(target_loss));
  return std::pow(fit.B / data_term, 1.0 / fit.beta);
}

namespace {

// Golden-section search for the minimum of a unimodal function on [lo, hi].
template <class F>
double golden_section(F f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

Prescription build(const ScalingLawFit& fit, double target, double n_avg, double t_inf,
                   double sparsity, double r) {
  Prescription p;
  p.avg_params = n_avg;
  p.tokens = tokens_for_loss(fit, target, n_avg);
  p.sparsity = sparsity;
  p.compression = r;
  p.final_params = n_avg / r;
  p.inference_tokens = t_inf;
  p.train_flops = 6.0 * p.avg_params * p.tokens;
  p.inference_flops = 2.0 * p.final_params * t_inf;
  p.lifetime_flops = p.train_flops + p.inference_flops;
  p.achieved_loss = lawfit::predict_loss(fit, p.avg_params, p.tokens);
  return p;
}

// Minimizes 6 N̄ D(N̄) + 2 (N̄ / r) T over log N̄ in (log N_min, log N_min + ln 1e8).
// The objective diverges at both ends (D -> inf at N_min, N̄ -> inf above), and is
// unimodal in between for this law family.
double optimal_avg_params(const ScalingLawFit& fit, double target, double t_inf, double r) {
  const double log_min = std::log(min_avg_params(fit, target));
  auto cost = [&](double log_n) {
    const double n = std::exp(log_n);
    return 6.0 * n * tokens_for_loss(fit, target, n) + 2.0 * (n / r) * t_inf;
  };
  return std::exp(golden_section(cost, log_min + 1e-9, log_min + std::log(1e8), 1e-12));
}

void check_inputs(double t_inf, double sparsity, double r) {
  if (!(t_inf >= 0.0)) throw ConfigError("inference tokens must be non-negative");
  if (!(sparsity >= 0.0 && sparsity < 1.0)) throw ConfigError("sparsity must lie in [0, 1)");
  if (!(r >= 1.0)) throw ConfigError("compression rate must be at least 1");
}

}  // namespace

Prescription solve_chinchilla(const ScalingLawFit& fit, double target_loss,
                              double inference_tokens) {
  check_inputs(inference_tokens, 0.0, 1.0);
  const double n = optimal_avg_params(fit, target_loss, 0.0, 1.0);
  return build(fit, target_loss, n, inference_tokens, 0.0, 1.0);
}

Prescription solve_lifetime(const ScalingLawFit& fit, double target_loss,
                            double inference_tokens, double sparsity, double compression) {
  check_inputs(inference_tokens, sparsity, compression);
  const double n = optimal_avg_params(fit, target_loss, inference_tokens, compression);
  return build(fit, target_loss, n, inference_tokens, sparsity, compression);
}

LifetimeComparison compare_lifetime(const ScalingLawFit& fit, double target_loss,
                                    double inference_tokens, double sparsity, double compression) {
  LifetimeComparison c;
  c.dense = solve_lifetime(fit, target_loss, inference_tokens, 0.0, 1.0);
  c.sparse = solve_lifetime(fit, target_loss, inference_tokens, sparsity, compression);
  c.saving = 1.0 - c.sparse.lifetime_flops / c.dense.lifetime_flops;
  return c;
}

double schedule_compression(const SparsityScheduleConfig& base, double sparsity) {
  if (sparsity == 0.0) return 1.0;
  SparsityScheduleConfig cfg = base;
  cfg.target_sparsity = sparsity;
  return compression_rate(build_schedule(cfg));
}

}  // namespace sparsescale::prescribe
