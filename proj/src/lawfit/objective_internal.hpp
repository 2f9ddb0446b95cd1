#pragma once

#include <span>
#include <vector>

#include "sparsescale/lawfit/objective.hpp"

namespace sparsescale::lawfit::detail {

// Logs of the dataset columns, computed once per fit.
struct UnifiedData {
  std::vector<double> log_n, log_d, log_loss;
};

struct FrantarData {
  std::vector<double> log_keep, log_n, log_d, log_loss;  // log_keep = log(1 - S)
};

UnifiedData prepare_unified(std::span<const RunRecord> data);
FrantarData prepare_frantar(std::span<const RunRecord> data);

double unified_objective(const double* p, const UnifiedData& d, double delta, double* grad);
double frantar_objective(const double* p, const FrantarData& d, double delta, double* grad);

}  // namespace sparsescale::lawfit::detail
