#include "sparsescale/lawfit/fit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "objective_internal.hpp"
#include "sparsescale/lawfit/lbfgs.hpp"

namespace sparsescale::lawfit {
namespace {

struct Range {
  double lo, hi;
};

std::size_t distinct(std::span<const RunRecord> data, double RunRecord::*field) {
  std::set<double> values;
  for (const RunRecord& r : data) values.insert(r.*field);
  return values.size();
}

void check_common(std::span<const RunRecord> data, double RunRecord::*params_field,
                  const char* params_name, const FitOptions& opt) {
  if (data.size() < 5)
    throw IllPosedError("fit needs at least 5 records, got " + std::to_string(data.size()));
  if (distinct(data, params_field) < 2)
    throw IllPosedError(std::string("all records share the same ") + params_name +
                        "; the parameter-count exponent is not identifiable");
  if (distinct(data, &RunRecord::total_tokens) < 2)
    throw IllPosedError(
        "all records share the same total_tokens; the data exponent is not identifiable");
  if (opt.starts < 1) throw IllPosedError("starts must be at least 1");
  if (opt.max_iterations < 1) throw IllPosedError("max_iterations must be at least 1");
}

// Draws every initialization up front from one seeded stream so the set of
// starts does not depend on how they are scheduled.
std::vector<std::vector<double>> draw_starts(const std::vector<Range>& ranges, int count,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> out(count);
  for (auto& x : out)
    for (const Range& r : ranges) x.push_back(std::uniform_real_distribution<double>(r.lo, r.hi)(rng));
  return out;
}

template <class Admissible>
std::vector<StartOutcome> run_starts(const Objective& objective,
                                     const std::vector<std::vector<double>>& inits,
                                     const FitOptions& opt, Admissible admissible) {
  std::vector<StartOutcome> outcomes(inits.size());
  LbfgsOptions lopt;
  lopt.max_iterations = opt.max_iterations;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < inits.size(); i = next++) {
      const LbfgsResult res = lbfgs_minimize(objective, inits[i], lopt);
      StartOutcome& o = outcomes[i];
      o.index = static_cast<int>(i);
      o.initial = inits[i];
      o.params = res.x;
      o.objective = res.value;
      o.iterations = res.iterations;
      o.converged = res.converged() && std::isfinite(res.value);
      o.admissible = o.converged && admissible(res.x);
    }
  };
  const int threads = std::clamp(opt.workers, 1, static_cast<int>(inits.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return outcomes;
}

// Lowest objective wins; the strict comparison keeps the lowest index on ties.
const StartOutcome* best_of(const std::vector<StartOutcome>& outcomes, bool admissible_only) {
  const StartOutcome* best = nullptr;
  for (const StartOutcome& o : outcomes) {
    if (admissible_only && !o.admissible) continue;
    if (!std::isfinite(o.objective)) continue;
    if (!best || o.objective < best->objective) best = &o;
  }
  return best;
}

int count_converged(const std::vector<StartOutcome>& outcomes) {
  return static_cast<int>(
      std::count_if(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.converged; }));
}

template <class Fit, class Params>
Fit make_fit(const StartOutcome& o, const std::vector<StartOutcome>& all) {
  Params p{};
  std::copy(o.params.begin(), o.params.end(), p.begin());
  Fit f = from_params(p);
  f.objective_value = o.objective;
  f.n_starts_converged = count_converged(all);
  f.n_starts = static_cast<int>(all.size());
  f.best_start = o.index;
  f.iterations = o.iterations;
  return f;
}

}  // namespace

ScalingLawFit fit(std::span<const RunRecord> data, const FitOptions& opt,
                  FitDiagnostics* diagnostics) {
  check_common(data, &RunRecord::avg_params, "avg_params", opt);
  const detail::UnifiedData prepared = detail::prepare_unified(data);
  const double delta = opt.delta;
  const Objective objective = [&](const std::vector<double>& x, std::vector<double>& g) {
    return detail::unified_objective(x.data(), prepared, delta, g.data());
  };
  // Order matches UnifiedParams: a, b, e, alpha, beta.
  const auto inits = draw_starts({{0, 30}, {0, 30}, {-2, 2}, {0, 2}, {0, 2}}, opt.starts, opt.seed);
  auto outcomes = run_starts(objective, inits, opt,
                             [](const std::vector<double>& x) { return x[3] > 0 && x[4] > 0; });
  if (diagnostics) diagnostics->starts = outcomes;

  if (const StartOutcome* best = best_of(outcomes, true))
    return make_fit<ScalingLawFit, UnifiedParams>(*best, outcomes);
  std::optional<ScalingLawFit> partial;
  if (const StartOutcome* best = best_of(outcomes, false))
    partial = make_fit<ScalingLawFit, UnifiedParams>(*best, outcomes);
  throw FitNotConvergedError("no initialization converged to a point with positive exponents",
                             partial, std::nullopt);
}

FrantarLawFit fit_frantar(std::span<const RunRecord> data, const FrantarFitOptions& opt,
                          FitDiagnostics* diagnostics) {
  check_common(data, &RunRecord::final_nonzero_params, "final_nonzero_params", opt);
  if (!opt.allow_single_sparsity && distinct(data, &RunRecord::sparsity) < 2)
    throw IllPosedError(
        "all records share one sparsity level; the sparsity parameters a_S, b_S, c_S are not "
        "identifiable");
  const detail::FrantarData prepared = detail::prepare_frantar(data);
  const double delta = opt.delta;
  const Objective objective = [&](const std::vector<double>& x, std::vector<double>& g) {
    return detail::frantar_objective(x.data(), prepared, delta, g.data());
  };
  // Order matches FrantarParams: log a_S, b_S, log c_S, b_N, log a_D, b_D, log c.
  const auto inits = draw_starts({{0, 8}, {0, 2}, {0, 8}, {0, 2}, {10, 30}, {0, 1}, {-2, 2}},
                                 opt.starts, opt.seed);
  auto outcomes = run_starts(objective, inits, opt,
                             [](const std::vector<double>& x) { return x[3] > 0 && x[5] > 0; });
  if (diagnostics) diagnostics->starts = outcomes;

  if (const StartOutcome* best = best_of(outcomes, true))
    return make_fit<FrantarLawFit, FrantarParams>(*best, outcomes);
  std::optional<FrantarLawFit> partial;
  if (const StartOutcome* best = best_of(outcomes, false))
    partial = make_fit<FrantarLawFit, FrantarParams>(*best, outcomes);
  throw FitNotConvergedError("no initialization converged to a point with positive exponents",
                             std::nullopt, partial);
}

}  // namespace sparsescale::lawfit
