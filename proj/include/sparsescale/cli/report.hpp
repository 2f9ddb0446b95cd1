#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sparsescale/cli/table.hpp"
#include "sparsescale/lawfit/law.hpp"
#include "sparsescale/prescribe/prescribe.hpp"
#include "sparsescale/theorysim/theory.hpp"
#include "sparsescale/trainer/train.hpp"

namespace sparsescale::cli {

enum class ReportKind { kScheduleSweep, kLrBatchSweep, kFit, kPrescription, kTrajectory };

std::string_view to_string(ReportKind k);
/// schedule_sweep | lr_bs_sweep | fit | prescription | trajectory; ConfigError otherwise.
ReportKind report_kind_from_string(std::string_view s);

/// Columns each report kind requires in its input table.
std::vector<std::string> required_columns(ReportKind k);

struct ReportOutput {
  std::filesystem::path csv;
  std::filesystem::path svg;
  std::vector<std::string> summary;  // first line: best configuration and deltas
  Table table;                       // the CSV that was written
};

/// Writes `<stem>.csv` and `<stem>.svg` into `out_dir` (stem defaults to the
/// kind's name) and returns the summary lines. Rows whose optional `status`
/// column is not "ok" are kept in the CSV but excluded from plots and the
/// summary. Throws SchemaError for an empty table or a missing column.
///
/// Required columns:
///   schedule_sweep  dense_fraction, prune_fraction, sparsity, duration, final_loss
///   lr_bs_sweep     learning_rate, batch_size, final_loss
///   fit             final_loss, predicted_loss
///   prescription    label, avg_params, final_params, tokens, train_flops,
///                   inference_flops, lifetime_flops
///   trajectory      compute, loss (optional: series)
ReportOutput write_report(const Table& results, ReportKind kind,
                          const std::filesystem::path& out_dir, const std::string& stem = "");

/// label, avg_params, total_tokens, sparsity, final_loss, predicted_loss, residual.
Table fit_table(std::span<const RunRecord> data, const lawfit::ScalingLawFit& fit);
Table fit_table(std::span<const RunRecord> data, const lawfit::FrantarLawFit& fit);

Table prescription_table(const std::vector<std::pair<std::string, prescribe::Prescription>>& rows);

/// series, compute, loss (one row per curve point).
Table curve_table(const std::vector<theorysim::CurvePoint>& curve, const std::string& series = "");
/// series, step, tokens, compute, active_params, train_loss, loss (held-out).
Table curve_table(const std::vector<trainer::CurvePoint>& curve, const std::string& series = "");

/// Appends the rows of `b` to `a`; the column lists must match.
void append_rows(Table& a, const Table& b);

}  // namespace sparsescale::cli
