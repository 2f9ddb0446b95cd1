#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sparsescale/core/errors.hpp"
#include "sparsescale/core/types.hpp"
#include "sparsescale/lawfit/law.hpp"
#include "sparsescale/lawfit/objective.hpp"

namespace sparsescale::lawfit {

struct FitOptions {
  int starts = 100;
  int max_iterations = 1000;
  std::uint64_t seed = 0;
  int workers = 1;  // starts run concurrently on up to this many threads
  double delta = kHuberDelta;
};

struct FrantarFitOptions : FitOptions {
  // A dataset with one sparsity level leaves a_S and c_S unidentifiable (only
  // their sum matters). This is rejected unless explicitly allowed, e.g. to
  // compare against the dense law on dense-only data.
  bool allow_single_sparsity = false;
};

/// Converged point of one initialization.
struct StartOutcome {
  int index = 0;
  std::vector<double> initial;
  std::vector<double> params;  // log-space parameter vector
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  bool admissible = false;  // converged with positive exponents
};

struct FitDiagnostics {
  std::vector<StartOutcome> starts;
};

/// No start converged to an admissible point. Carries the best partial result.
class FitNotConvergedError : public Error {
 public:
  FitNotConvergedError(const std::string& what, std::optional<ScalingLawFit> unified,
                       std::optional<FrantarLawFit> frantar)
      : Error(what), best_unified(std::move(unified)), best_frantar(std::move(frantar)) {}

  std::optional<ScalingLawFit> best_unified;
  std::optional<FrantarLawFit> best_frantar;
};

/// Multi-start L-BFGS fit of the unified law. Initializations are drawn
/// uniformly from alpha, beta in [0, 2], a, b in [0, 30], e in [-2, 2]. The
/// reported fit is the admissible start with the lowest objective, ties going to
/// the lowest start index. Deterministic for a given seed regardless of workers.
///
/// Throws IllPosedError unless the dataset has >= 5 records with >= 2 distinct
/// average parameter counts and >= 2 distinct token counts.
ScalingLawFit fit(std::span<const RunRecord> data, const FitOptions& options = {},
                  FitDiagnostics* diagnostics = nullptr);

/// Multi-start fit of the prior sparse law on (sparsity, final nonzero params,
/// tokens). Initializations: log a_S, log c_S in [0, 8], b_S, b_N in [0, 2],
/// log a_D in [10, 30], b_D in [0, 1], log c in [-2, 2].
FrantarLawFit fit_frantar(std::span<const RunRecord> data, const FrantarFitOptions& options = {},
                          FitDiagnostics* diagnostics = nullptr);

}  // namespace sparsescale::lawfit
