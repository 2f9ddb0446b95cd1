#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsescale/cli/grid.hpp"
#include "sparsescale/core/types.hpp"

namespace sparsescale::cli {

inline constexpr int kStoreSchemaVersion = 1;

/// One line of the results store: the configuration, its outcome, and either
/// the produced RunRecord or the error that stopped the run.
struct SweepRecord {
  int schema_version = kStoreSchemaVersion;
  std::string key;  // content hash of (runner fingerprint, point)
  std::size_t index = 0;  // position in the enumeration that produced it
  std::string runner;
  SweepPoint point;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;           // empty when ok
  int error_code = 0;          // exit-code class of the failure (2 = infeasible / ill-posed)
  RunRecord record;            // valid when ok
  double effective_compute = 0.0;
  double elapsed_seconds = 0.0;
};

nlohmann::json to_json(const SweepRecord& r);
/// Throws SchemaError naming the missing field or on an unsupported schema version.
SweepRecord sweep_record_from_json(const nlohmann::json& j);

/// Append-only line-delimited store. Each append writes one complete line and
/// flushes, so a crash loses at most the line being written; unreadable
/// trailing lines are skipped on load. Appends are serialized internally, so
/// concurrent workers may share one store.
class ResultStore {
 public:
  explicit ResultStore(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }

  /// All records in file order (a later record with the same key supersedes an
  /// earlier one in latest()).
  std::vector<SweepRecord> load() const;

  /// Last record per key.
  std::map<std::string, SweepRecord> latest() const;

  void append(const SweepRecord& r);

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
};

}  // namespace sparsescale::cli
