#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "sparsescale/core/types.hpp"

namespace sparsescale {

/// Plain-text `key = value` configuration.
///
/// One entry per line. Blank lines and everything after `#` are ignored; keys
/// and values are trimmed. Later entries override earlier ones. Recognized
/// schedule keys:
///
///     prunable_params      nonprunable_params   target_sparsity
///     dense_fraction       prune_fraction       steps_per_iteration
///     tokens_per_step      total_compute        accounting (all|prunable)
///
/// Other modules read further keys (trainer, theory simulator) from the same file.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  Count get_count(const std::string& key, Count fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Reads the schedule keys, falling back to `defaults` for absent ones.
SparsityScheduleConfig schedule_from_config(const KeyValueConfig& kv,
                                            const SparsityScheduleConfig& defaults = {});

/// Writes `cfg` in the same format that schedule_from_config reads.
std::string to_config_text(const SparsityScheduleConfig& cfg);

}  // namespace sparsescale
