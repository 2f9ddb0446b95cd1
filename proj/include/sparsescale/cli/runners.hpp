#pragma once

#include <memory>
#include <string>

#include "sparsescale/cli/grid.hpp"
#include "sparsescale/core/types.hpp"
#include "sparsescale/theorysim/theory.hpp"
#include "sparsescale/trainer/corpus.hpp"
#include "sparsescale/trainer/train.hpp"

namespace sparsescale::cli {

struct RunOutput {
  RunRecord record;
  double effective_compute = 0.0;
};

/// Executes one sweep configuration. run() must be safe to call concurrently:
/// every call builds its own state.
class Runner {
 public:
  virtual ~Runner() = default;
  virtual std::string name() const = 0;
  /// Everything besides the point that affects the result, in a stable textual
  /// form; part of the content key that makes sweeps resumable.
  virtual std::string fingerprint() const = 0;
  virtual RunOutput run(const SweepPoint& point, std::uint64_t seed) const = 0;
};

/// Runs the theoretical loss model over the materialized schedule.
class TheorySimRunner final : public Runner {
 public:
  TheorySimRunner(theorysim::TheoryParams params, SparsityScheduleConfig base,
                  theorysim::SimulationOptions options = {}, double tokens_per_param = 20.0);
  std::string name() const override { return "theorysim"; }
  std::string fingerprint() const override;
  RunOutput run(const SweepPoint& point, std::uint64_t seed) const override;

  SparsityScheduleConfig schedule(const SweepPoint& point) const;

 private:
  theorysim::TheoryParams params_;
  SparsityScheduleConfig base_;
  theorysim::SimulationOptions options_;
  double tokens_per_param_;
};

/// Trains a TinyLM with the point's schedule and hyperparameters.
class TrainerRunner final : public Runner {
 public:
  TrainerRunner(trainer::TrainConfig base, std::shared_ptr<const trainer::Corpus> corpus,
                double tokens_per_param = 20.0);
  std::string name() const override { return "trainer"; }
  std::string fingerprint() const override;
  RunOutput run(const SweepPoint& point, std::uint64_t seed) const override;

  /// The exact training configuration run() uses for `point` and `seed`.
  trainer::TrainConfig config(const SweepPoint& point, std::uint64_t seed) const;

 private:
  trainer::TrainConfig base_;
  std::shared_ptr<const trainer::Corpus> corpus_;
  double tokens_per_param_;
};

}  // namespace sparsescale::cli
