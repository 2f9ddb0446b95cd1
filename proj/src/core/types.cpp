#include "sparsescale/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sparsescale/core/errors.hpp"

namespace sparsescale {

void ModelShape::validate() const {
  if (prunable <= 0) throw ConfigError("prunable parameter count must be positive");
  if (nonprunable < 0) throw ConfigError("nonprunable parameter count must be non-negative");
}

std::string_view to_string(Accounting a) {
  return a == Accounting::kAllParams ? "all" : "prunable";
}

Accounting accounting_from_string(std::string_view s) {
  if (s == "all") return Accounting::kAllParams;
  if (s == "prunable") return Accounting::kPrunableOnly;
  throw ConfigError("unknown accounting mode '" + std::string(s) + "' (expected all|prunable)");
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::kDense: return "dense";
    case Phase::kPrune: return "prune";
    case Phase::kRecover: return "recover";
  }
  return "?";
}

void SparsityScheduleConfig::validate() const {
  shape.validate();
  if (!(target_sparsity >= 0.0 && target_sparsity < 1.0))
    throw ConfigError("target_sparsity must lie in [0, 1)");
  if (!(dense_fraction >= 0.0) || !(prune_fraction >= 0.0))
    throw ConfigError("phase fractions must be non-negative");
  // Tolerate the rounding in sums like 0.25 + 0.75 written as decimals.
  if (dense_fraction + prune_fraction > 1.0 + 1e-12)
    throw ConfigError("dense_fraction + prune_fraction must not exceed 1");
  if (steps_per_iteration < 1) throw ConfigError("steps_per_iteration must be at least 1");
  if (tokens_per_step < 1) throw ConfigError("tokens_per_step must be at least 1");
  if (!(total_compute > 0.0) || !std::isfinite(total_compute))
    throw ConfigError("total_compute must be a positive finite FLOP count");
}

Count ParamTrajectory::total_tokens() const {
  Count d = 0;
  for (const auto& s : segments) d += s.tokens;
  return d;
}

Count ParamTrajectory::final_active() const {
  if (segments.empty()) throw std::invalid_argument("empty trajectory");
  return segments.back().active_params;
}

Count ParamTrajectory::initial_active() const {
  if (segments.empty()) throw std::invalid_argument("empty trajectory");
  return segments.front().active_params;
}

ParamTrajectory ParamTrajectory::from_pairs(const std::vector<std::pair<Count, Count>>& pairs) {
  ParamTrajectory t;
  t.accounting = Accounting::kPrunableOnly;
  Count largest = 0;
  for (const auto& [n, d] : pairs) {
    if (n <= 0 || d <= 0) throw std::invalid_argument("segment counts must be positive");
    largest = std::max(largest, n);
    Segment s;
    s.active_params = n;
    s.prunable_active = n;
    s.tokens = d;
    s.steps = d;
    s.phase = t.segments.empty() || n == t.segments.back().active_params ? Phase::kDense
                                                                         : Phase::kPrune;
    t.segments.push_back(s);
  }
  t.shape = ModelShape{largest, 0};
  return t;
}

std::string_view to_string(RunSource s) {
  return s == RunSource::kMeasured ? "measured" : "simulated";
}

RunSource run_source_from_string(std::string_view s) {
  if (s == "measured") return RunSource::kMeasured;
  if (s == "simulated") return RunSource::kSimulated;
  throw SchemaError("unknown run source '" + std::string(s) + "'");
}

void RunRecord::validate() const {
  if (!(avg_params > 0.0)) throw SchemaError("record '" + label + "': avg_params must be positive");
  if (!(total_tokens > 0.0))
    throw SchemaError("record '" + label + "': total_tokens must be positive");
  if (!(final_loss > 0.0)) throw SchemaError("record '" + label + "': final_loss must be positive");
  if (!(sparsity >= 0.0 && sparsity < 1.0))
    throw SchemaError("record '" + label + "': sparsity must lie in [0, 1)");
}

}  // namespace sparsescale
