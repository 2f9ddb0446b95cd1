#include "sparsescale/cli/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "sparsescale/core/errors.hpp"
#include "sparsescale/core/schedule.hpp"

namespace sparsescale::cli {
namespace {

template <typename T>
std::vector<T> normalized(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Shortest decimal form that parses back to the same double.
std::string number(double v) {
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace

SweepGrid schedule_grid() { return SweepGrid{}; }

SweepGrid lr_batch_grid() {
  SweepGrid g;
  g.dense_fractions = {0.25};
  g.prune_fractions = {0.5};
  g.sparsities = {0.8};
  g.durations = {1.0};
  g.learning_rates = {0.025, 0.1, 0.4};
  g.batch_sizes = {16, 64, 256};
  return g;
}

std::string SweepPoint::canonical() const {
  return "dense_fraction=" + number(dense_fraction) + ";prune_fraction=" + number(prune_fraction) +
         ";sparsity=" + number(sparsity) + ";duration=" + number(duration) +
         ";learning_rate=" + number(learning_rate) + ";batch_size=" + std::to_string(batch_size);
}

bool valid_allocation(double dense_fraction, double prune_fraction) {
  return dense_fraction + prune_fraction <= 1.0 + 1e-12;
}

std::vector<std::pair<double, double>> valid_pairs(const SweepGrid& grid) {
  std::vector<std::pair<double, double>> out;
  for (double d : normalized(grid.dense_fractions))
    for (double p : normalized(grid.prune_fractions))
      if (valid_allocation(d, p)) out.emplace_back(d, p);
  return out;
}

std::vector<SweepPoint> enumerate_points(const SweepGrid& grid, std::string* warning) {
  if (grid.dense_fractions.empty() || grid.prune_fractions.empty() || grid.sparsities.empty() ||
      grid.durations.empty())
    throw ConfigError("sweep grid axes must be non-empty");
  const auto pairs = valid_pairs(grid);
  const auto sparsities = normalized(grid.sparsities);
  const auto durations = normalized(grid.durations);
  const auto lrs = grid.learning_rates.empty() ? std::vector<double>{0.0} : normalized(grid.learning_rates);
  const auto batches = grid.batch_sizes.empty() ? std::vector<Count>{0} : normalized(grid.batch_sizes);
  std::vector<SweepPoint> out;
  for (const auto& [d, p] : pairs)
    for (double s : sparsities)
      for (double t : durations)
        for (double lr : lrs)
          for (Count b : batches) out.push_back({d, p, s, t, lr, b});
  if (out.empty() && warning)
    *warning = "sweep grid is empty: no (dense_fraction, prune_fraction) pair satisfies "
               "dense_fraction + prune_fraction <= 1";
  return out;
}

SparsityScheduleConfig schedule_for(const SweepPoint& point, const SparsityScheduleConfig& base,
                                    double tokens_per_param) {
  SparsityScheduleConfig cfg = base;
  cfg.dense_fraction = point.dense_fraction;
  cfg.prune_fraction = point.prune_fraction;
  cfg.target_sparsity = point.sparsity;
  if (point.batch_size > 0) cfg.tokens_per_step = point.batch_size;
  const double n0 = static_cast<double>(active_params_for(cfg, cfg.shape.prunable));
  cfg.total_compute = 6.0 * n0 * (point.duration * tokens_per_param * n0);
  return cfg;
}

std::vector<SparsityScheduleConfig> enumerate_schedules(const SweepGrid& grid,
                                                        const SparsityScheduleConfig& base,
                                                        double tokens_per_param,
                                                        std::string* warning) {
  std::vector<SparsityScheduleConfig> out;
  for (const SweepPoint& p : enumerate_points(grid, warning))
    out.push_back(schedule_for(p, base, tokens_per_param));
  return out;
}

std::uint64_t stable_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::uint64_t derive_seed(std::uint64_t global_seed, const std::string& content_key) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = stable_hash(content_key) ^ (global_seed + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("empty entry in number list '" + text + "'");
    const auto e = item.find_last_not_of(" \t");
    item = item.substr(b, e - b + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !std::isfinite(v))
      throw ConfigError("not a number: '" + item + "' in list '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

}  // namespace sparsescale::cli
