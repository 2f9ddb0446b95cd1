#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sparsescale/core/config_file.hpp"
#include "sparsescale/core/errors.hpp"
#include "sparsescale/core/schedule.hpp"
#include "sparsescale/core/trajectory_io.hpp"

using namespace sparsescale;

namespace {

// 138M prunable parameters at 0.5M tokens per step, 33.5B tokens of dense-equivalent
// compute: the 162M-10x setting with embeddings excluded.
SparsityScheduleConfig canonical_config() { return canonical_schedule(); }

// Independent cost model for K iterations: recomputes every prunable count from
// the geometric sequence rather than calling into the schedule module.
double brute_force_pruning_cost(const SparsityScheduleConfig& cfg, Count k_iters) {
  const double keep = 1.0 - cfg.target_sparsity;
  const double p0 = static_cast<double>(cfg.shape.prunable);
  const double np = cfg.accounting == Accounting::kAllParams ? static_cast<double>(cfg.shape.nonprunable) : 0.0;
  double total = 0.0;
  for (Count k = 1; k <= k_iters; ++k) {
    const double prunable = k == k_iters ? std::round(p0 * keep) : std::round(p0 * std::pow(keep, double(k) / double(k_iters)));
    total += 6.0 * (prunable + np) * double(cfg.tokens_per_step) * double(cfg.steps_per_iteration);
  }
  return total;
}

double phase_compute(const ParamTrajectory& t, Phase p) {
  double c = 0.0;
  for (const auto& s : t.segments)
    if (s.phase == p) c += 6.0 * double(s.active_params) * double(s.tokens);
  return c;
}

}  // namespace

TEST_CASE("dense schedule collapses to one segment") {
  SparsityScheduleConfig cfg;
  cfg.shape = {1000, 0};
  cfg.target_sparsity = 0.0;
  cfg.dense_fraction = 0.5;  // ignored when S = 0
  cfg.prune_fraction = 0.25;
  cfg.tokens_per_step = 10;
  cfg.total_compute = 6.0 * 1000.0 * 5000.0;
  const auto traj = build_schedule(cfg);
  REQUIRE(traj.segments.size() == 1);
  CHECK(traj.segments[0].active_params == 1000);
  CHECK(traj.segments[0].tokens == 5000);
  CHECK(average_params(traj) == 1000.0);
  CHECK(compression_rate(traj) == 1.0);
  CHECK(match_dense(traj) == cfg.shape);
}

TEST_CASE("dense schedule counts nonprunable parameters by default") {
  SparsityScheduleConfig cfg;
  cfg.shape = {800, 200};
  cfg.tokens_per_step = 4;
  cfg.total_compute = 6.0 * 1000.0 * 400.0;
  const auto traj = build_schedule(cfg);
  CHECK(average_params(traj) == 1000.0);
  CHECK(match_dense(traj) == cfg.shape);
}

TEST_CASE("two iterations at 75% sparsity halve the prunable weights each time") {
  SparsityScheduleConfig cfg;
  cfg.shape = {1000, 0};
  cfg.target_sparsity = 0.75;
  cfg.dense_fraction = 0.0;
  cfg.prune_fraction = 1.0;
  cfg.steps_per_iteration = 100;
  cfg.tokens_per_step = 1;
  // 100 steps at 500 params + 100 steps at 250 params.
  cfg.total_compute = 6.0 * 100.0 * (500.0 + 250.0);

  const auto plan = solve_iterations(cfg);
  CHECK(plan.iterations == 2);
  CHECK(plan.removal_fraction == doctest::Approx(0.5).epsilon(1e-12));

  const auto traj = build_schedule(cfg);
  REQUIRE(traj.segments.size() == 2);
  CHECK(traj.segments[0].prunable_active == 500);
  CHECK(traj.segments[1].prunable_active == 250);
  CHECK(traj.segments[0].steps == 100);
  CHECK(traj.segments[1].steps == 100);
}

TEST_CASE("solve_iterations matches an exhaustive scan over K") {
  auto cfg = canonical_config();
  cfg.shape = {50'000'000, 3'000'000};
  cfg.accounting = Accounting::kAllParams;
  cfg.tokens_per_step = 256;
  for (double budget_scale : {3.0, 17.0, 120.0, 801.0}) {
    CAPTURE(budget_scale);
    cfg.total_compute = budget_scale * 6.0 * 53e6 * 256.0 * 100.0 / cfg.prune_fraction;
    const auto plan = solve_iterations(cfg);
    // The dense phase's whole-step carry flows into the pruning budget.
    const double dense_cost = 6.0 * 53e6 * 256.0;
    const double dense_budget = cfg.dense_fraction * cfg.total_compute;
    const double carry = dense_budget - std::floor(dense_budget / dense_cost) * dense_cost;
    const double budget = cfg.prune_fraction * cfg.total_compute + carry;
    Count best = 0;
    for (Count k = 1; k <= 5000; ++k)
      if (brute_force_pruning_cost(cfg, k) <= budget) best = k;
    CHECK(plan.iterations == best);
  }
}

TEST_CASE("pruning-phase compute is nondecreasing in K") {
  auto cfg = canonical_config();
  cfg.shape = {2'000'000, 100'000};
  cfg.accounting = Accounting::kAllParams;
  for (double s : {0.2, 0.5, 0.8, 0.95}) {
    cfg.target_sparsity = s;
    double prev = 0.0;
    for (Count k = 1; k <= 400; ++k) {
      const double c = pruning_phase_compute(cfg, k);
      CHECK(c >= prev);
      prev = c;
    }
  }
}

TEST_CASE("removal fraction vanishes as sparsity goes to zero") {
  auto cfg = canonical_config();
  cfg.shape = {1'000'000'000, 0};
  for (double s : {1e-3, 1e-5, 1e-6}) {
    cfg.target_sparsity = s;
    const auto plan = solve_iterations(cfg);
    CHECK(plan.removal_fraction <= s);
    CHECK(plan.removal_fraction > 0.0);
  }
}

TEST_CASE("infeasible pruning budget names the pruning phase") {
  SparsityScheduleConfig cfg;
  cfg.shape = {1000, 0};
  cfg.target_sparsity = 0.5;
  cfg.dense_fraction = 0.25;
  cfg.prune_fraction = 0.25;
  cfg.steps_per_iteration = 100;
  cfg.tokens_per_step = 1;
  cfg.total_compute = 6.0 * 1000.0 * 100.0;  // pruning phase gets a quarter of one iteration
  CHECK_THROWS_AS(build_schedule(cfg), InfeasibleError);
  try {
    build_schedule(cfg);
  } catch (const InfeasibleError& e) {
    CHECK(std::string(e.what()).find("pruning phase") != std::string::npos);
  }

  cfg.prune_fraction = 0.0;
  CHECK_THROWS_AS(build_schedule(cfg), InfeasibleError);

  cfg.target_sparsity = 0.0;
  cfg.total_compute = 1.0;
  CHECK_THROWS_AS(build_schedule(cfg), InfeasibleError);
}

TEST_CASE("invalid configs are rejected") {
  auto cfg = canonical_config();
  cfg.dense_fraction = 0.75;
  cfg.prune_fraction = 0.5;
  CHECK_THROWS_AS(build_schedule(cfg), ConfigError);
  cfg = canonical_config();
  cfg.target_sparsity = 1.0;
  CHECK_THROWS_AS(build_schedule(cfg), ConfigError);
  cfg = canonical_config();
  cfg.steps_per_iteration = 0;
  CHECK_THROWS_AS(build_schedule(cfg), ConfigError);
  cfg = canonical_config();
  cfg.shape.prunable = 0;
  CHECK_THROWS_AS(build_schedule(cfg), ConfigError);
}

TEST_CASE("average_params, effective_compute and compression on hand-built trajectories") {
  const auto constant = ParamTrajectory::from_pairs({{100, 50}});
  CHECK(average_params(constant) == 100.0);
  CHECK(effective_compute(constant) == 30000.0);
  CHECK(compression_rate(constant) == 1.0);

  const auto two = ParamTrajectory::from_pairs({{100, 10}, {50, 10}});
  CHECK(average_params(two) == 75.0);
  CHECK(effective_compute(two) == 9000.0);
  CHECK(compression_rate(two) == 1.5);
  CHECK(match_dense(two) == ModelShape{75, 0});
}

TEST_CASE("canonical schedule: prune-phase mean size follows the geometric sequence") {
  const auto cfg = canonical_config();
  const auto traj = build_schedule(cfg);
  const auto plan = solve_iterations(cfg);
  CHECK(plan.iterations > 200);

  double weighted = 0.0, tokens = 0.0;
  for (const auto& s : traj.segments)
    if (s.phase == Phase::kPrune) {
      weighted += double(s.prunable_active) * double(s.tokens);
      tokens += double(s.tokens);
    }
  const double mean_fraction = weighted / tokens / double(cfg.shape.prunable);

  // Continuous limit: integral of (1-S)^t over t in [0, 1].
  const double continuous = 0.8 / std::log(5.0);
  CHECK(continuous == doctest::Approx(0.497).epsilon(1e-3));
  CHECK(mean_fraction == doctest::Approx(continuous).epsilon(0.01));

  // Discrete oracle: equal-length iterations ending at (1-S).
  double discrete = 0.0;
  for (Count k = 1; k <= plan.iterations; ++k)
    discrete += std::pow(0.2, double(k) / double(plan.iterations));
  discrete /= double(plan.iterations);
  CHECK(mean_fraction == doctest::Approx(discrete).epsilon(2e-3));
}

TEST_CASE("canonical schedule: average is about 40% of the start and compression about 2x") {
  const auto cfg = canonical_config();
  const auto traj = build_schedule(cfg);
  const auto plan = solve_iterations(cfg);

  // Phases split compute 25/50/25; tokens per phase are compute / (6 N). With
  // the discrete geometric mean m of the pruning phase, N_avg / N0 =
  // 1 / (0.25 + 0.5 / m + 0.25 / 0.2).
  double m = 0.0;
  for (Count k = 1; k <= plan.iterations; ++k) m += std::pow(0.2, double(k) / double(plan.iterations));
  m /= double(plan.iterations);
  const double oracle = 1.0 / (0.25 + 0.5 / m + 0.25 / 0.2);

  const double ratio = average_params(traj) / double(cfg.shape.prunable);
  CHECK(ratio == doctest::Approx(oracle).epsilon(2e-3));
  CHECK(ratio == doctest::Approx(0.399).epsilon(0.01));
  CHECK(compression_rate(traj) == doctest::Approx(2.0).epsilon(0.01));

  const auto dense = match_dense(traj);
  CHECK(double(dense.total()) == doctest::Approx(0.399 * 138e6).epsilon(0.01));
}

TEST_CASE("effective compute equals 6 * average * tokens and stays within one step of the budget") {
  const auto cfg = canonical_config();
  const auto traj = build_schedule(cfg);
  const double c = effective_compute(traj);
  CHECK(c == doctest::Approx(6.0 * average_params(traj) * double(traj.total_tokens())).epsilon(1e-12));
  CHECK(c <= cfg.total_compute * (1.0 + 1e-12));
  CHECK(c >= cfg.total_compute - step_compute(cfg.shape.total(), cfg.tokens_per_step));
}

// Property checks over randomly generated configurations.
TEST_CASE("schedule invariants hold across random configurations") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double dense_options[] = {0.0, 0.25, 0.5};
  const double prune_options[] = {0.25, 0.5};
  const Count steps_options[] = {1, 10, 100};

  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    SparsityScheduleConfig cfg;
    cfg.shape.prunable = static_cast<Count>(std::pow(10.0, 3.0 + 6.0 * unit(rng)));
    cfg.shape.nonprunable = static_cast<Count>(0.3 * unit(rng) * double(cfg.shape.prunable));
    cfg.target_sparsity = 0.05 + 0.9 * unit(rng);
    cfg.dense_fraction = dense_options[rng() % 3];
    cfg.prune_fraction = prune_options[rng() % 2];
    cfg.steps_per_iteration = steps_options[rng() % 3];
    cfg.tokens_per_step = static_cast<Count>(std::pow(10.0, 6.0 * unit(rng))) + 1;
    cfg.accounting = (rng() % 2) ? Accounting::kAllParams : Accounting::kPrunableOnly;
    const double iters = 2.0 + 400.0 * unit(rng);
    cfg.total_compute = iters * step_compute(active_params_for(cfg, cfg.shape.prunable), cfg.tokens_per_step) *
                        double(cfg.steps_per_iteration) / cfg.prune_fraction;
    CAPTURE(trial);

    ParamTrajectory traj;
    IterationPlan plan;
    try {
      traj = build_schedule(cfg);
      plan = solve_iterations(cfg);
    } catch (const InfeasibleError&) {
      continue;  // tiny budgets or tiny models; covered separately
    }
    ++checked;

    const double n_max = double(active_params_for(cfg, cfg.shape.prunable));
    const double one_step = 6.0 * n_max * double(cfg.tokens_per_step);

    // Round-trip budget.
    const double c = effective_compute(traj);
    CHECK(c <= cfg.total_compute * (1.0 + 1e-12));
    CHECK(c >= cfg.total_compute - one_step * (1.0 + 1e-12));

    // Phase accounting within one step.
    CHECK(std::fabs(phase_compute(traj, Phase::kDense) - cfg.dense_fraction * cfg.total_compute) <= one_step);
    CHECK(std::fabs(phase_compute(traj, Phase::kPrune) - cfg.prune_fraction * cfg.total_compute) <= one_step);
    CHECK(std::fabs(phase_compute(traj, Phase::kRecover) - cfg.recover_fraction() * cfg.total_compute) <=
          one_step * (1.0 + 1e-9));

    // Geometric exactness before rounding.
    CHECK(std::pow(1.0 - plan.removal_fraction, double(plan.iterations)) ==
          doctest::Approx(1.0 - cfg.target_sparsity).epsilon(1e-6));

    // Strict decrease across pruning iterations, positive tokens, exact final size.
    Count prev = cfg.shape.prunable;
    Count prune_segments = 0;
    for (const auto& s : traj.segments) {
      CHECK(s.tokens > 0);
      if (s.phase == Phase::kPrune) {
        CHECK(s.prunable_active < prev);
        prev = s.prunable_active;
        ++prune_segments;
      }
    }
    CHECK(prune_segments == plan.iterations);
    CHECK(traj.final_active() == active_params_for(cfg, final_prunable(cfg)));
  }
  CHECK(checked > 200);
}

TEST_CASE("average parameter count decreases strictly with target sparsity") {
  auto cfg = canonical_config();
  cfg.shape = {10'000'000, 500'000};
  cfg.accounting = Accounting::kAllParams;
  cfg.tokens_per_step = 1000;
  cfg.total_compute = 6.0 * 10.5e6 * 1000.0 * 20000.0;
  cfg.target_sparsity = 0.0;
  double prev = average_params(build_schedule(cfg));
  CHECK(prev == doctest::Approx(double(cfg.shape.total())));
  for (double s = 0.1; s < 0.95; s += 0.1) {
    cfg.target_sparsity = s;
    const double avg = average_params(build_schedule(cfg));
    CHECK(avg < prev);
    prev = avg;
  }
}

TEST_CASE("config text round-trips through schedule_from_config") {
  const auto cfg = canonical_config();
  const auto back = schedule_from_config(KeyValueConfig::parse(to_config_text(cfg)));
  CHECK(back.shape == cfg.shape);
  CHECK(back.target_sparsity == cfg.target_sparsity);
  CHECK(back.dense_fraction == cfg.dense_fraction);
  CHECK(back.prune_fraction == cfg.prune_fraction);
  CHECK(back.steps_per_iteration == cfg.steps_per_iteration);
  CHECK(back.tokens_per_step == cfg.tokens_per_step);
  CHECK(back.total_compute == cfg.total_compute);
  CHECK(back.accounting == cfg.accounting);
}

TEST_CASE("config parser handles comments and reports bad lines") {
  const auto kv = KeyValueConfig::parse("# schedule\nprunable_params = 1e6  # linear layers\n\n target_sparsity=0.5\n");
  CHECK(kv.get_count("prunable_params", 0) == 1'000'000);
  CHECK(kv.get_double("target_sparsity", 0.0) == 0.5);
  CHECK(kv.get_double("absent", 7.0) == 7.0);
  CHECK_THROWS_AS(KeyValueConfig::parse("no equals sign"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("x = abc").get_double("x", 0), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("x = 1.5").get_count("x", 0), ConfigError);
  CHECK_THROWS_AS(schedule_from_config(KeyValueConfig::parse("accounting = some")), ConfigError);
}

TEST_CASE("trajectory CSV round-trips") {
  auto cfg = canonical_config();
  cfg.total_compute /= 50.0;
  const auto traj = build_schedule(cfg);
  std::stringstream ss;
  write_trajectory_csv(ss, traj);
  const auto back = read_trajectory_csv(ss);
  REQUIRE(back.segments.size() == traj.segments.size());
  for (std::size_t i = 0; i < traj.segments.size(); ++i) {
    CHECK(back.segments[i].active_params == traj.segments[i].active_params);
    CHECK(back.segments[i].tokens == traj.segments[i].tokens);
  }
  CHECK(average_params(back) == doctest::Approx(average_params(traj)).epsilon(1e-12));

  std::stringstream bad("index,n,d\n0,1,1\n");
  CHECK_THROWS_AS(read_trajectory_csv(bad), SchemaError);
}
