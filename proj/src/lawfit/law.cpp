#include "sparsescale/lawfit/law.hpp"

#include <cmath>

namespace sparsescale::lawfit {

ScalingLawFit chinchilla_rounded() {
  ScalingLawFit f;
  f.A = 406.4;
  f.B = 410.7;
  f.E = 1.69;
  f.alpha = 0.34;
  f.beta = 0.28;
  return f;
}

ScalingLawFit chinchilla_unrounded() {
  ScalingLawFit f = chinchilla_rounded();
  f.alpha = 0.336;
  f.beta = 0.283;
  return f;
}

double predict_loss(const ScalingLawFit& fit, double avg_params, double tokens) {
  return fit.A / std::pow(avg_params, fit.alpha) + fit.B / std::pow(tokens, fit.beta) + fit.E;
}

double predict_loss(const FrantarLawFit& fit, double sparsity, double nonzero_params,
                    double tokens) {
  const double sparse_term = fit.a_S * std::pow(1.0 - sparsity, fit.b_S) + fit.c_S;
  return sparse_term / std::pow(nonzero_params, fit.b_N) + std::pow(fit.a_D / tokens, fit.b_D) +
         fit.c;
}

}  // namespace sparsescale::lawfit
