#include "sparsescale/cli/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "sparsescale/core/errors.hpp"

namespace sparsescale::cli {
namespace {

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Reads one CSV record; false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string cur;
  bool quoted_field = false;
  for (;;) {
    const int ch = in.get();
    if (ch == std::char_traits<char>::eof()) {
      if (quoted_field) throw SchemaError("unterminated quoted CSV field");
      fields.push_back(cur);
      return true;
    }
    const char c = static_cast<char>(ch);
    if (quoted_field) {
      if (c == '"') {
        if (in.peek() == '"') {
          cur += '"';
          in.get();
        } else {
          quoted_field = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty()) {
      quoted_field = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c == '\n') {
      fields.push_back(cur);
      return true;
    } else if (c != '\r') {
      cur += c;
    }
  }
}

}  // namespace

bool Table::has(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw SchemaError("results are missing column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

void Table::require(const std::vector<std::string>& names) const {
  std::string missing;
  for (const std::string& n : names)
    if (!has(n)) missing += (missing.empty() ? "'" : ", '") + n + "'";
  if (!missing.empty()) throw SchemaError("results are missing column " + missing);
}

const std::string& Table::text(std::size_t row, const std::string& name) const {
  return rows.at(row).at(column(name));
}

double Table::number(std::size_t row, const std::string& name) const {
  const std::string& s = text(row, name);
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size())
    throw SchemaError("column '" + name + "' row " + std::to_string(row + 1) +
                      ": not a number: '" + s + "'");
  return v;
}

Table read_csv(std::istream& in) {
  Table t;
  std::vector<std::string> fields;
  if (!read_record(in, fields)) return t;
  t.columns = fields;
  while (read_record(in, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != t.columns.size())
      throw SchemaError("CSV row " + std::to_string(t.rows.size() + 1) + " has " +
                        std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(t.columns.size()));
    t.rows.push_back(fields);
  }
  return t;
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << (i ? "," : "") << quoted(table.columns[i]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << quoted(row[i]);
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_csv(out, table);
}

Table sweep_table(const std::vector<SweepRecord>& records) {
  Table t;
  t.columns = {"index",      "key",        "runner",       "dense_fraction", "prune_fraction",
               "sparsity",   "duration",   "learning_rate", "batch_size",    "seed",
               "status",     "error",      "avg_params",    "total_tokens",  "final_loss",
               "final_nonzero_params", "effective_compute"};
  for (const SweepRecord& r : records) {
    std::vector<std::string> row{std::to_string(r.index),
                                 r.key,
                                 r.runner,
                                 number(r.point.dense_fraction),
                                 number(r.point.prune_fraction),
                                 number(r.point.sparsity),
                                 number(r.point.duration),
                                 number(r.point.learning_rate),
                                 std::to_string(r.point.batch_size),
                                 std::to_string(r.seed),
                                 r.ok ? "ok" : "failed",
                                 r.error};
    if (r.ok) {
      row.push_back(number(r.record.avg_params));
      row.push_back(number(r.record.total_tokens));
      row.push_back(number(r.record.final_loss));
      row.push_back(number(r.record.final_nonzero_params));
      row.push_back(number(r.effective_compute));
    } else {
      row.insert(row.end(), 5, "");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table load_table(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("no such file: " + path.string());
  if (path.extension() == ".jsonl") {
    std::vector<SweepRecord> records;
    for (auto& [key, r] : ResultStore(path).latest()) records.push_back(r);
    std::stable_sort(records.begin(), records.end(),
                     [](const SweepRecord& a, const SweepRecord& b) { return a.index < b.index; });
    return sweep_table(records);
  }
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  return read_csv(in);
}

}  // namespace sparsescale::cli
