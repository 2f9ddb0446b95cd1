#pragma once

#include <array>
#include <span>

#include "sparsescale/core/types.hpp"
#include "sparsescale/lawfit/law.hpp"

namespace sparsescale::lawfit {

inline constexpr double kHuberDelta = 1e-3;

/// r^2/2 for |r| <= delta, delta * (|r| - delta/2) beyond.
double huber(double r, double delta = kHuberDelta);
double huber_derivative(double r, double delta = kHuberDelta);

/// Log-space parameters of the unified law: (a, b, e, alpha, beta) with
/// A = exp(a), B = exp(b), E = exp(e).
using UnifiedParams = std::array<double, 5>;

/// Log-space parameters of the prior sparse law:
/// (log a_S, b_S, log c_S, b_N, log a_D, b_D, log c).
using FrantarParams = std::array<double, 7>;

UnifiedParams to_params(const ScalingLawFit& fit);
ScalingLawFit from_params(const UnifiedParams& p);
FrantarParams to_params(const FrantarLawFit& fit);
FrantarLawFit from_params(const FrantarParams& p);

/// Sum over records of huber(LSE(a - alpha log N̄, b - beta log D, e) - log L).
/// Writes the gradient when `grad` is non-null. Throws IllPosedError on an
/// empty dataset or a record with non-positive loss, parameters or tokens.
double huber_objective(const UnifiedParams& p, std::span<const RunRecord> data,
                       double delta = kHuberDelta, UnifiedParams* grad = nullptr);

/// Same Huber-on-log-residual objective for the prior sparse law, evaluated on
/// (sparsity, final_nonzero_params, total_tokens).
double frantar_objective(const FrantarParams& p, std::span<const RunRecord> data,
                         double delta = kHuberDelta, FrantarParams* grad = nullptr);

}  // namespace sparsescale::lawfit
