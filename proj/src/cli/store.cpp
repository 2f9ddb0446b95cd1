#include "sparsescale/cli/store.hpp"

#include <fstream>

#include "sparsescale/core/errors.hpp"
#include "sparsescale/lawfit/dataset.hpp"

namespace sparsescale::cli {
namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* name) {
  if (!j.is_object() || !j.contains(name))
    throw SchemaError(std::string("results record is missing field '") + name + "'");
  return j.at(name);
}

}  // namespace

nlohmann::json to_json(const SweepRecord& r) {
  nlohmann::json j;
  j["schema_version"] = r.schema_version;
  j["key"] = r.key;
  j["index"] = r.index;
  j["runner"] = r.runner;
  j["point"] = {{"dense_fraction", r.point.dense_fraction},
                {"prune_fraction", r.point.prune_fraction},
                {"sparsity", r.point.sparsity},
                {"duration", r.point.duration},
                {"learning_rate", r.point.learning_rate},
                {"batch_size", r.point.batch_size}};
  j["seed"] = r.seed;
  j["ok"] = r.ok;
  j["error"] = r.error;
  j["error_code"] = r.error_code;
  if (r.ok) j["record"] = lawfit::to_json(r.record);
  j["effective_compute"] = r.effective_compute;
  j["elapsed_seconds"] = r.elapsed_seconds;
  return j;
}

SweepRecord sweep_record_from_json(const nlohmann::json& j) {
  SweepRecord r;
  r.schema_version = field(j, "schema_version").get<int>();
  if (r.schema_version != kStoreSchemaVersion)
    throw SchemaError("unsupported results schema_version " + std::to_string(r.schema_version));
  r.key = field(j, "key").get<std::string>();
  r.index = field(j, "index").get<std::size_t>();
  r.runner = field(j, "runner").get<std::string>();
  const nlohmann::json& p = field(j, "point");
  r.point.dense_fraction = field(p, "dense_fraction").get<double>();
  r.point.prune_fraction = field(p, "prune_fraction").get<double>();
  r.point.sparsity = field(p, "sparsity").get<double>();
  r.point.duration = field(p, "duration").get<double>();
  r.point.learning_rate = field(p, "learning_rate").get<double>();
  r.point.batch_size = field(p, "batch_size").get<Count>();
  r.seed = field(j, "seed").get<std::uint64_t>();
  r.ok = field(j, "ok").get<bool>();
  r.error = field(j, "error").get<std::string>();
  r.error_code = field(j, "error_code").get<int>();
  if (r.ok) r.record = lawfit::record_from_json(field(j, "record"));
  r.effective_compute = field(j, "effective_compute").get<double>();
  r.elapsed_seconds = field(j, "elapsed_seconds").get<double>();
  return r;
}

ResultStore::ResultStore(std::filesystem::path path) : path_(std::move(path)) {}

std::vector<SweepRecord> ResultStore::load() const {
  std::lock_guard lock(mutex_);
  std::vector<SweepRecord> out;
  std::ifstream in(path_);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) continue;  // torn write from an interrupted run
    out.push_back(sweep_record_from_json(j));
  }
  return out;
}

std::map<std::string, SweepRecord> ResultStore::latest() const {
  std::map<std::string, SweepRecord> out;
  for (SweepRecord& r : load()) out[r.key] = std::move(r);
  return out;
}

void ResultStore::append(const SweepRecord& r) {
  const std::string line = to_json(r).dump() + "\n";
  std::lock_guard lock(mutex_);
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  // A torn last line (no trailing newline) must not swallow the new record.
  bool needs_newline = false;
  {
    std::ifstream probe(path_, std::ios::binary | std::ios::ate);
    if (probe && probe.tellg() > 0) {
      probe.seekg(-1, std::ios::end);
      needs_newline = probe.get() != '\n';
    }
  }
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error("cannot open results store " + path_.string());
  if (needs_newline) out << '\n';
  out << line;
  out.flush();
  if (!out) throw Error("failed to append to results store " + path_.string());
}

}  // namespace sparsescale::cli
