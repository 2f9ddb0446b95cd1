#include "sparsescale/trainer/prune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "sparsescale/core/errors.hpp"

namespace sparsescale::trainer {

void magnitude_prune(std::span<double> weights, std::span<std::uint8_t> mask, Count keep) {
  if (weights.size() != mask.size()) throw ConfigError("weights and mask differ in length");
  if (keep < 0) throw ConfigError("cannot keep a negative number of weights");
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) active.push_back(i);
  if (keep > static_cast<Count>(active.size()))
    throw ConfigError("cannot keep " + std::to_string(keep) + " weights, only " +
                      std::to_string(active.size()) + " are active");
  if (keep == static_cast<Count>(active.size())) return;

  // Strict total order: larger magnitude first, lower index on ties.
  auto before = [&](std::size_t a, std::size_t b) {
    const double ma = std::fabs(weights[a]), mb = std::fabs(weights[b]);
    return ma != mb ? ma > mb : a < b;
  };
  const auto cut = active.begin() + keep;
  std::nth_element(active.begin(), cut, active.end(), before);
  for (auto it = cut; it != active.end(); ++it) {
    mask[*it] = 0;
    weights[*it] = 0.0;
  }
}

void global_magnitude_prune(TinyLM& model, Count target_remaining) {
  magnitude_prune(model.params().first(model.mask().size()), model.mask(), target_remaining);
}

}  // namespace sparsescale::trainer
