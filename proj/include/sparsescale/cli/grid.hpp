#pragma once

#include <string>
#include <vector>

#include "sparsescale/core/types.hpp"

namespace sparsescale::cli {

/// Axes of a schedule / hyperparameter sweep. Every axis is a set: values are
/// sorted and deduplicated before enumeration.
struct SweepGrid {
  std::vector<double> dense_fractions{0.0, 0.25, 0.5, 0.75};
  std::vector<double> prune_fractions{0.25, 0.5, 0.75, 1.0};
  std::vector<double> sparsities{0.2, 0.4, 0.6, 0.8};
  // Training budget as a multiple of the compute-optimal token count
  // (tokens_per_param tokens per initial dense parameter).
  std::vector<double> durations{10.0, 20.0};
  // Empty learning-rate / batch axes mean "use the base run's value".
  std::vector<double> learning_rates;
  std::vector<Count> batch_sizes;
};

/// The schedule grid: 4 dense shares x 4 pruning shares (10 valid pairs),
/// 4 sparsities, 2 durations -> 80 configurations.
SweepGrid schedule_grid();

/// Learning-rate x batch-size grid at the canonical (0.25, 0.5) allocation,
/// S = 0.8 and one duration. Values are desk-scale: each axis steps by 4x like
/// the large-scale grid, centred on the trainer defaults.
SweepGrid lr_batch_grid();

/// One configuration of a sweep.
struct SweepPoint {
  double dense_fraction = 0.25;
  double prune_fraction = 0.5;
  double sparsity = 0.8;
  double duration = 1.0;
  double learning_rate = 0.0;  // 0 = base value
  Count batch_size = 0;        // 0 = base value

  /// Stable textual form, used for content hashing and seeds.
  std::string canonical() const;
};

/// f_dense + f_prune <= 1 (with a 1e-12 tolerance for decimal inputs).
bool valid_allocation(double dense_fraction, double prune_fraction);

/// Valid (f_dense, f_prune) pairs in lexicographic order.
std::vector<std::pair<double, double>> valid_pairs(const SweepGrid& grid);

/// Cross product of all axes filtered by valid_allocation, in lexicographic
/// order over (dense, prune, sparsity, duration, lr, batch). When the result is
/// empty and `warning` is non-null, it receives an explanation. Throws
/// ConfigError if an axis other than lr/batch is empty.
std::vector<SweepPoint> enumerate_points(const SweepGrid& grid, std::string* warning = nullptr);

/// Schedule configurations for the points: `base` supplies shape, pruning
/// cadence and accounting; each point sets fractions, sparsity and
///   total_compute = 6 * N0 * (duration * tokens_per_param * N0),
/// where N0 is the initial active parameter count under base's accounting.
std::vector<SparsityScheduleConfig> enumerate_schedules(const SweepGrid& grid,
                                                        const SparsityScheduleConfig& base,
                                                        double tokens_per_param = 20.0,
                                                        std::string* warning = nullptr);

SparsityScheduleConfig schedule_for(const SweepPoint& point, const SparsityScheduleConfig& base,
                                    double tokens_per_param = 20.0);

/// 64-bit FNV-1a of `text`; stable across platforms and runs.
std::uint64_t stable_hash(const std::string& text);

/// Lower-case 16-digit hexadecimal form of a hash.
std::string hex(std::uint64_t value);

/// Per-run seed derived from the global seed and the configuration's content,
/// independent of the configuration's position in the sweep.
std::uint64_t derive_seed(std::uint64_t global_seed, const std::string& content_key);

/// Parses a comma-separated list of numbers ("0,0.25,0.5"). Throws ConfigError.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace sparsescale::cli
