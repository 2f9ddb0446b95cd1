#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sparsescale/cli/grid.hpp"
#include "sparsescale/cli/runners.hpp"
#include "sparsescale/cli/store.hpp"

namespace sparsescale::cli {

struct SweepOptions {
  std::uint64_t seed = 0;
  int workers = 1;
  bool retry_failed = false;  // re-execute configurations whose stored run failed
  // Called (serialized) after each configuration finishes or is skipped.
  std::function<void(const SweepRecord&, bool executed)> on_record;
};

struct SweepSummary {
  std::vector<SweepRecord> rows;  // one per point, in enumeration order
  std::size_t executed = 0;
  std::size_t skipped = 0;  // already in the store
  std::size_t failed = 0;   // rows whose (stored or new) run failed
};

/// Content key of a configuration for a runner.
std::string content_key(const Runner& runner, const SweepPoint& point);

/// Runs every point not already completed in `store`, with up to
/// `options.workers` concurrent runs. Each run gets a seed derived from the
/// global seed and its content key. Run failures are recorded as failed rows
/// and never abort the sweep.
SweepSummary run_sweep(const std::vector<SweepPoint>& points, const Runner& runner,
                       ResultStore& store, const SweepOptions& options = {});

}  // namespace sparsescale::cli
