#include "sparsescale/core/config_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sparsescale/core/errors.hpp"

namespace sparsescale {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  return v ? parse_double(key, *v) : fallback;
}

Count KeyValueConfig::get_count(const std::string& key, Count fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  // Accept scientific notation ("1e9") as long as the value is integral.
  const double d = parse_double(key, *v);
  if (d != std::floor(d) || std::fabs(d) > 9.0e18)
    throw ConfigError("config key '" + key + "': expected an integer, got '" + *v + "'");
  return static_cast<Count>(d);
}

SparsityScheduleConfig schedule_from_config(const KeyValueConfig& kv,
                                            const SparsityScheduleConfig& defaults) {
  SparsityScheduleConfig cfg = defaults;
  cfg.shape.prunable = kv.get_count("prunable_params", cfg.shape.prunable);
  cfg.shape.nonprunable = kv.get_count("nonprunable_params", cfg.shape.nonprunable);
  cfg.target_sparsity = kv.get_double("target_sparsity", cfg.target_sparsity);
  cfg.dense_fraction = kv.get_double("dense_fraction", cfg.dense_fraction);
  cfg.prune_fraction = kv.get_double("prune_fraction", cfg.prune_fraction);
  cfg.steps_per_iteration = kv.get_count("steps_per_iteration", cfg.steps_per_iteration);
  cfg.tokens_per_step = kv.get_count("tokens_per_step", cfg.tokens_per_step);
  cfg.total_compute = kv.get_double("total_compute", cfg.total_compute);
  if (const auto a = kv.get("accounting")) cfg.accounting = accounting_from_string(*a);
  return cfg;
}

std::string to_config_text(const SparsityScheduleConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "prunable_params = " << cfg.shape.prunable << '\n'
     << "nonprunable_params = " << cfg.shape.nonprunable << '\n'
     << "target_sparsity = " << cfg.target_sparsity << '\n'
     << "dense_fraction = " << cfg.dense_fraction << '\n'
     << "prune_fraction = " << cfg.prune_fraction << '\n'
     << "steps_per_iteration = " << cfg.steps_per_iteration << '\n'
     << "tokens_per_step = " << cfg.tokens_per_step << '\n'
     << "total_compute = " << cfg.total_compute << '\n'
     << "accounting = " << to_string(cfg.accounting) << '\n';
  return os.str();
}

}  // namespace sparsescale
