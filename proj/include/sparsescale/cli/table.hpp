#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sparsescale/cli/store.hpp"

namespace sparsescale::cli {

/// A rectangular table of text cells with named columns.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  bool has(const std::string& name) const;
  /// Index of a column; throws SchemaError naming the column if absent.
  std::size_t column(const std::string& name) const;
  /// Throws SchemaError naming every absent column.
  void require(const std::vector<std::string>& names) const;
  /// Numeric value of a cell; NaN for an empty cell, SchemaError if unparsable.
  double number(std::size_t row, const std::string& name) const;
  const std::string& text(std::size_t row, const std::string& name) const;
};

/// RFC-4180-style CSV (quoted fields may contain commas, quotes and newlines).
Table read_csv(std::istream& in);
void write_csv(std::ostream& out, const Table& table);
void write_csv(const std::filesystem::path& path, const Table& table);

/// One row per sweep record: the point, seed, status and (when ok) the run's
/// outcome. Columns: index,key,runner,dense_fraction,prune_fraction,sparsity,
/// duration,learning_rate,batch_size,seed,status,error,avg_params,total_tokens,
/// final_loss,final_nonzero_params,effective_compute.
Table sweep_table(const std::vector<SweepRecord>& records);

/// Loads a results table: `.jsonl` files are read as a results store (latest
/// record per configuration, in enumeration order), anything else as CSV.
Table load_table(const std::filesystem::path& path);

}  // namespace sparsescale::cli
