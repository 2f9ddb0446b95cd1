// sparsescale: command-line front end. See README.md for the subcommands, the
// config-file keys and the exit codes.

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <map>
#include <set>

#include "commands.hpp"
#include "sparsescale/core/errors.hpp"
#include "sparsescale/lawfit/fit.hpp"

using namespace sparsescale;
using namespace sparsescale::tool;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse pre-training scaling-law toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  std::string config_path;
  app.add_option("--seed", seed, "global random seed (default 0)");
  app.add_option("--workers", workers, "concurrent runs / fit starts (default 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", out_dir, "directory for output files (default .)");
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);

  struct Command {
    const char* name;
    const char* help;
    int (*run)(Context&);
  };
  const Command commands[] = {
      {"schedule", "materialize a sparsity schedule and print its statistics", run_schedule},
      {"fit", "fit the average-parameter scaling law to a dataset", run_fit},
      {"fit-frantar", "fit the sparsity-aware baseline law to a dataset", run_fit_frantar},
      {"prescribe", "training- and lifetime-optimal model size and token count", run_prescribe},
      {"simulate", "integrate the theoretical loss model over a schedule", run_simulate},
      {"train", "sparse pre-training of a tiny character-level model", run_train},
      {"sweep", "run a schedule or learning-rate/batch sweep with resumable results",
       run_sweep_command},
      {"report", "render a results table as CSV + SVG with a best-configuration summary",
       run_report},
  };

  std::map<std::string, std::string> cli_values;  // key -> value from the command line
  std::map<std::string, CLI::App*> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    subs[c.name] = sub;
    for (const KeySpec& k : keys_for(c.name)) {
      const std::string key = k.name;
      if (k.flag) {
        sub->add_flag_callback(flag_name(key), [&cli_values, key] { cli_values[key] = "true"; },
                               k.help);
      } else {
        sub->add_option_function<std::string>(
            flag_name(key), [&cli_values, key](const std::string& v) { cli_values[key] = v; },
            k.help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    Context ctx;
    ctx.out = &std::cout;
    ctx.err = &std::cerr;
    if (!config_path.empty()) {
      ctx.kv = KeyValueConfig::load(config_path);
      const auto known = all_keys();
      for (const auto& [key, value] : ctx.kv.values())
        if (!std::binary_search(known.begin(), known.end(), key))
          throw ConfigError("unknown config key '" + key + "' in " + config_path);
    }
    for (const auto& [key, value] : cli_values) ctx.kv.set(key, value);
    ctx.seed = seed ? *seed : static_cast<std::uint64_t>(ctx.kv.get_count("seed", 0));
    ctx.workers = workers ? *workers : static_cast<int>(ctx.kv.get_count("workers", 1));
    if (ctx.workers < 1) throw ConfigError("workers must be at least 1");
    ctx.out_dir = out_dir ? *out_dir : ctx.kv.get_string("out_dir", ".");

    for (const Command& c : commands)
      if (subs[c.name]->parsed()) return c.run(ctx);
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const IllPosedError& e) {
    std::cerr << "ill-posed: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const lawfit::FitNotConvergedError& e) {
    std::cerr << "fit did not converge: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
