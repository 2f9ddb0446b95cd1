#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sparsescale/core/config_file.hpp"

namespace sparsescale::tool {

/// A configuration key: its name in config files (`--name-with-dashes` on the
/// command line), whether it is a boolean flag, and its help text.
struct KeySpec {
  std::string name;
  std::string help;
  bool flag = false;
};

/// Keys accepted by a subcommand (global keys excluded).
std::vector<KeySpec> keys_for(const std::string& command);

/// Every key any subcommand accepts, plus the global ones; config files may
/// only contain these.
std::vector<std::string> all_keys();

struct Context {
  KeyValueConfig kv;
  std::uint64_t seed = 0;
  int workers = 1;
  std::filesystem::path out_dir = ".";
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

/// Each returns the process exit code (0 ok, 3 partial sweep failure); errors
/// are thrown and mapped to exit codes by the caller.
int run_schedule(Context& ctx);
int run_fit(Context& ctx);
int run_fit_frantar(Context& ctx);
int run_prescribe(Context& ctx);
int run_simulate(Context& ctx);
int run_train(Context& ctx);
int run_sweep_command(Context& ctx);
int run_report(Context& ctx);

}  // namespace sparsescale::tool
