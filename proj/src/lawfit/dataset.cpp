#include "sparsescale/lawfit/dataset.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "sparsescale/core/errors.hpp"

namespace sparsescale::lawfit {

using nlohmann::json;

json to_json(const RunRecord& r) {
  return json{{"label", r.label},
              {"avg_params", r.avg_params},
              {"total_tokens", r.total_tokens},
              {"final_loss", r.final_loss},
              {"sparsity", r.sparsity},
              {"final_nonzero_params", r.final_nonzero_params},
              {"prunable", r.shape.prunable},
              {"nonprunable", r.shape.nonprunable},
              {"source", std::string(to_string(r.source))}};
}

RunRecord record_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("record is not a JSON object");
  for (const char* key : {"label", "avg_params", "total_tokens", "final_loss"})
    if (!j.contains(key)) throw SchemaError(std::string("record is missing field '") + key + "'");
  RunRecord r;
  try {
    r.label = j.at("label").get<std::string>();
    r.avg_params = j.at("avg_params").get<double>();
    r.total_tokens = j.at("total_tokens").get<double>();
    r.final_loss = j.at("final_loss").get<double>();
    r.sparsity = j.value("sparsity", 0.0);
    r.final_nonzero_params = j.value("final_nonzero_params", 0.0);
    r.shape.prunable = j.value("prunable", Count{0});
    r.shape.nonprunable = j.value("nonprunable", Count{0});
    r.source = run_source_from_string(j.value("source", std::string("measured")));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("record has a field of the wrong type: ") + e.what());
  }
  return r;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const std::string& column, std::size_t row) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw SchemaError("row " + std::to_string(row) + ", column '" + column + "': '" + text +
                      "' is not a number");
  return v;
}

}  // namespace

std::vector<RunRecord> read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("dataset is empty (no header row)");
  const auto header = split_csv(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* key : {"label", "avg_params", "total_tokens", "final_loss"})
    if (!col.count(key)) throw SchemaError(std::string("dataset is missing column '") + key + "'");

  std::vector<RunRecord> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw SchemaError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(header.size()));
    auto num = [&](const char* key, double fallback) {
      auto it = col.find(key);
      return it == col.end() ? fallback : parse_number(cells[it->second], key, row);
    };
    RunRecord r;
    r.label = cells[col["label"]];
    r.avg_params = num("avg_params", 0.0);
    r.total_tokens = num("total_tokens", 0.0);
    r.final_loss = num("final_loss", 0.0);
    r.sparsity = num("sparsity", 0.0);
    r.final_nonzero_params = num("final_nonzero_params", 0.0);
    r.shape.prunable = static_cast<Count>(std::llround(num("prunable", 0.0)));
    r.shape.nonprunable = static_cast<Count>(std::llround(num("nonprunable", 0.0)));
    if (auto it = col.find("source"); it != col.end())
      r.source = run_source_from_string(cells[it->second]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunRecord> read_dataset_jsonl(std::istream& in) {
  std::vector<RunRecord> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw SchemaError("line " + std::to_string(row) + ": " + e.what());
    }
    out.push_back(record_from_json(j));
  }
  return out;
}

void write_dataset_csv(std::ostream& out, std::span<const RunRecord> data) {
  out << "label,avg_params,total_tokens,final_loss,sparsity,final_nonzero_params,prunable,"
         "nonprunable,source\n";
  out.precision(17);
  for (const RunRecord& r : data) {
    if (r.label.find(',') != std::string::npos)
      throw SchemaError("label '" + r.label + "' contains a comma");
    out << r.label << ',' << r.avg_params << ',' << r.total_tokens << ',' << r.final_loss << ','
        << r.sparsity << ',' << r.final_nonzero_params << ',' << r.shape.prunable << ','
        << r.shape.nonprunable << ',' << to_string(r.source) << '\n';
  }
}

void write_dataset_jsonl(std::ostream& out, std::span<const RunRecord> data) {
  for (const RunRecord& r : data) out << to_json(r).dump() << '\n';
}

std::vector<RunRecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open dataset '" + path.string() + "'");
  return path.extension() == ".csv" ? read_dataset_csv(in) : read_dataset_jsonl(in);
}

namespace {

template <class Predict>
json prediction_block(std::span<const RunRecord> data, Predict predict) {
  json rows = json::array();
  double sum_abs = 0.0, max_abs = 0.0;
  for (const RunRecord& r : data) {
    const double p = predict(r);
    const double err = std::fabs(p - r.final_loss);
    sum_abs += err;
    max_abs = std::max(max_abs, err);
    rows.push_back({{"label", r.label},
                    {"avg_params", r.avg_params},
                    {"total_tokens", r.total_tokens},
                    {"sparsity", r.sparsity},
                    {"actual_loss", r.final_loss},
                    {"predicted_loss", p}});
  }
  return json{{"records", rows},
              {"mean_abs_error", data.empty() ? 0.0 : sum_abs / data.size()},
              {"max_abs_error", max_abs}};
}

}  // namespace

json fit_report(const ScalingLawFit& f, std::span<const RunRecord> data) {
  json j{{"law", "unified"},
         {"parameters",
          {{"A", f.A}, {"B", f.B}, {"E", f.E}, {"alpha", f.alpha}, {"beta", f.beta}}},
         {"diagnostics",
          {{"objective_value", f.objective_value},
           {"n_starts", f.n_starts},
           {"n_starts_converged", f.n_starts_converged},
           {"best_start", f.best_start},
           {"iterations", f.iterations}}}};
  j["fit_quality"] = prediction_block(
      data, [&](const RunRecord& r) { return predict_loss(f, r.avg_params, r.total_tokens); });
  return j;
}

json fit_report(const FrantarLawFit& f, std::span<const RunRecord> data) {
  json j{{"law", "frantar"},
         {"parameters",
          {{"a_S", f.a_S},
           {"b_S", f.b_S},
           {"c_S", f.c_S},
           {"b_N", f.b_N},
           {"a_D", f.a_D},
           {"b_D", f.b_D},
           {"c", f.c}}},
         {"diagnostics",
          {{"objective_value", f.objective_value},
           {"n_starts", f.n_starts},
           {"n_starts_converged", f.n_starts_converged},
           {"best_start", f.best_start},
           {"iterations", f.iterations}}}};
  j["fit_quality"] = prediction_block(data, [&](const RunRecord& r) {
    return predict_loss(f, r.sparsity, r.final_nonzero_params, r.total_tokens);
  });
  return j;
}

}  // namespace sparsescale::lawfit
