#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "sparsescale/core/types.hpp"
#include "sparsescale/lawfit/law.hpp"

namespace sparsescale::lawfit {

// Dataset files carry one RunRecord per row/line with the fields
//   label, avg_params, total_tokens, final_loss            (required)
//   sparsity, final_nonzero_params, prunable, nonprunable, source   (optional)
// Missing optional fields default to sparsity 0, final_nonzero_params 0,
// an empty shape and source "measured". Labels must not contain commas in CSV.

nlohmann::json to_json(const RunRecord& r);
/// Throws SchemaError naming the first missing required field.
RunRecord record_from_json(const nlohmann::json& j);

std::vector<RunRecord> read_dataset_csv(std::istream& in);
std::vector<RunRecord> read_dataset_jsonl(std::istream& in);
void write_dataset_csv(std::ostream& out, std::span<const RunRecord> data);
void write_dataset_jsonl(std::ostream& out, std::span<const RunRecord> data);

/// Reads `.csv` as CSV and anything else as line-delimited JSON.
std::vector<RunRecord> load_dataset(const std::filesystem::path& path);

/// Structured report: fitted parameters, optimizer diagnostics, and per-record
/// predicted vs actual loss with summary error statistics.
nlohmann::json fit_report(const ScalingLawFit& fit, std::span<const RunRecord> data);
nlohmann::json fit_report(const FrantarLawFit& fit, std::span<const RunRecord> data);

}  // namespace sparsescale::lawfit
