#pragma once

#include <functional>
#include <string_view>
#include <vector>

namespace sparsescale::lawfit {

/// Objective callback: returns f(x) and writes the gradient into `grad`
/// (already sized to x.size()).
using Objective = std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;

struct LbfgsOptions {
  int max_iterations = 1000;
  int history = 10;
  // Converged when max |g_i| <= gradient_tolerance ...
  double gradient_tolerance = 1e-10;
  // ... or when an accepted step lowers f by at most
  // function_tolerance * max(|f|, 1).
  double function_tolerance = 1e-15;
  int max_line_search_evaluations = 40;
  // Strong Wolfe constants.
  double c1 = 1e-4;
  double c2 = 0.9;
};

enum class LbfgsStatus { kGradientConverged, kFunctionConverged, kMaxIterations, kLineSearchFailed };

std::string_view to_string(LbfgsStatus s);

struct LbfgsResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  LbfgsStatus status = LbfgsStatus::kMaxIterations;

  bool converged() const {
    return status == LbfgsStatus::kGradientConverged || status == LbfgsStatus::kFunctionConverged;
  }
};

/// Limited-memory BFGS with a strong-Wolfe line search (cubic interpolation
/// zoom). Non-finite trial values are treated as an overshoot and shrink the step.
LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double> x0,
                           const LbfgsOptions& options = {});

}  // namespace sparsescale::lawfit
