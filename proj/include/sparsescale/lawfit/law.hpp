#pragma once

namespace sparsescale::lawfit {

/// L(N̄, D) = A / N̄^alpha + B / D^beta + E, with N̄ the average parameter count.
struct ScalingLawFit {
  double A = 0.0;
  double B = 0.0;
  double E = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double objective_value = 0.0;  // Huber objective at the reported optimum
  int n_starts_converged = 0;
  int n_starts = 0;
  int best_start = -1;
  int iterations = 0;  // optimizer iterations of the winning start
};

/// Published Chinchilla constants with the rounded exponents (0.34, 0.28).
ScalingLawFit chinchilla_rounded();

/// Same constants with the unrounded exponents (0.336, 0.283).
ScalingLawFit chinchilla_unrounded();

double predict_loss(const ScalingLawFit& fit, double avg_params, double tokens);

/// Prior sparse law:
/// L(S, N, D) = (a_S (1 - S)^b_S + c_S) / N^b_N + (a_D / D)^b_D + c,
/// with N the nonzero parameter count at the end of training.
struct FrantarLawFit {
  double a_S = 0.0;
  double b_S = 0.0;
  double c_S = 0.0;
  double b_N = 0.0;
  double a_D = 0.0;
  double b_D = 0.0;
  double c = 0.0;
  double objective_value = 0.0;
  int n_starts_converged = 0;
  int n_starts = 0;
  int best_start = -1;
  int iterations = 0;
};

double predict_loss(const FrantarLawFit& fit, double sparsity, double nonzero_params,
                    double tokens);

}  // namespace sparsescale::lawfit
