#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sparsescale/core/errors.hpp"
#include "sparsescale/core/schedule.hpp"
#include "sparsescale/prescribe/prescribe.hpp"

using namespace sparsescale;
using namespace sparsescale::prescribe;
using lawfit::ScalingLawFit;

namespace {

// Training-compute optimum in closed form: the stationarity condition
// alpha A / N^alpha = beta B / D^beta turns the loss constraint into
// E + (1 + alpha / beta) A / N^alpha = target.
double chinchilla_oracle_n(const ScalingLawFit& f, double target) {
  return std::pow(f.A * (1.0 + f.alpha / f.beta) / (target - f.E), 1.0 / f.alpha);
}

// Relative residual of the Lagrange conditions of
// min 6 N D + 2 (N / r) T  s.t.  L(N, D) = target.
double lifetime_kkt_residual(const ScalingLawFit& f, const Prescription& p) {
  const double lhs = (6.0 * p.tokens + 2.0 * p.inference_tokens / p.compression) * p.avg_params /
                     (6.0 * p.avg_params * p.tokens);
  const double rhs = (f.alpha * f.A / std::pow(p.avg_params, f.alpha)) /
                     (f.beta * f.B / std::pow(p.tokens, f.beta));
  return std::fabs(lhs - rhs) / rhs;
}

ScalingLawFit random_fit(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScalingLawFit f;
  f.A = 50 + 900 * u(rng);
  f.B = 50 + 2000 * u(rng);
  f.E = 0.5 + 1.5 * u(rng);
  f.alpha = 0.15 + 0.5 * u(rng);
  f.beta = 0.15 + 0.5 * u(rng);
  return f;
}

}  // namespace

TEST_CASE("lifetime_flops accounting identity") {
  CHECK(lifetime_flops(70e9, 4.26e12, 70e9, 100e12) == doctest::Approx(1.5789e25).epsilon(1e-4));
  CHECK(lifetime_flops(28e9, 16.6e12, 14e9, 100e12) == doctest::Approx(5.5888e24).epsilon(1e-4));
  CHECK(lifetime_flops(3e9, 5e11, 1e9, 0.0) == 6.0 * 3e9 * 5e11);
}

TEST_CASE("tokens_for_loss inverts the loss constraint") {
  const ScalingLawFit f = lawfit::chinchilla_rounded();
  const double d = tokens_for_loss(f, 1.95, 30e9);
  CHECK(lawfit::predict_loss(f, 30e9, d) == doctest::Approx(1.95).epsilon(1e-12));
  CHECK_THROWS_AS(tokens_for_loss(f, 1.95, 0.9 * min_avg_params(f, 1.95)), InfeasibleError);
}

TEST_CASE("Chinchilla prescription matches the closed-form optimum") {
  for (const ScalingLawFit& f : {lawfit::chinchilla_rounded(), lawfit::chinchilla_unrounded()}) {
    for (double target : {1.85, 1.89, 2.0, 2.5}) {
      CAPTURE(target);
      const Prescription p = solve_chinchilla(f, target);
      CHECK(p.avg_params == doctest::Approx(chinchilla_oracle_n(f, target)).epsilon(1e-7));
      CHECK(std::fabs(p.achieved_loss - target) <= 1e-4);
      const double lhs = f.alpha * f.A / std::pow(p.avg_params, f.alpha);
      const double rhs = f.beta * f.B / std::pow(p.tokens, f.beta);
      CHECK(std::fabs(lhs - rhs) / rhs <= 1e-3);
      CHECK(p.final_params == p.avg_params);
      CHECK(p.train_flops == doctest::Approx(6.0 * p.avg_params * p.tokens));
    }
  }
  // With the rounded exponents the optimum at 1.89 is ~55.5B / ~5.78T.
  const Prescription r = solve_chinchilla(lawfit::chinchilla_rounded(), 1.89, 100e12);
  CHECK(r.avg_params == doctest::Approx(55.5e9).epsilon(0.01));
  CHECK(r.tokens == doctest::Approx(5.78e12).epsilon(0.01));
  CHECK(r.inference_flops == doctest::Approx(2.0 * r.avg_params * 100e12));
}

TEST_CASE("lifetime prescriptions satisfy the Lagrange conditions") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const ScalingLawFit f = random_fit(rng);
    const double target = f.E + 0.05 + u(rng);
    const double t_inf = std::pow(10.0, 9 + 6 * u(rng));
    const double r = 1.0 + 3.0 * u(rng);
    const Prescription p = solve_lifetime(f, target, t_inf, 0.5, r);
    CHECK(lifetime_kkt_residual(f, p) <= 1e-3);
    CHECK(std::fabs(p.achieved_loss - target) <= 1e-4);
    CHECK(p.final_params == doctest::Approx(p.avg_params / r));
    CHECK(p.lifetime_flops ==
          doctest::Approx(lifetime_flops(p.avg_params, p.tokens, p.final_params, t_inf)));
  }
}

TEST_CASE("reduction identities") {
  const ScalingLawFit f = lawfit::chinchilla_unrounded();
  const Prescription chin = solve_chinchilla(f, 1.89);
  for (double s : {0.0, 0.5, 0.8}) {
    const Prescription p = solve_lifetime(f, 1.89, 0.0, s, 1.0 + 2 * s);
    CHECK(p.avg_params == doctest::Approx(chin.avg_params).epsilon(1e-8));
    CHECK(p.tokens == doctest::Approx(chin.tokens).epsilon(1e-8));
  }
  const LifetimeComparison c = compare_lifetime(f, 1.89, 100e12, 0.0, 1.0);
  CHECK(c.dense.avg_params == c.sparse.avg_params);
  CHECK(c.saving == doctest::Approx(0.0).scale(1e-12));
}

TEST_CASE("unrounded exponents reproduce the lifetime rows") {
  const ScalingLawFit f = lawfit::chinchilla_unrounded();
  const LifetimeComparison c = compare_lifetime(f, 1.89, 100e12, 0.8, 2.0);
  CHECK(c.dense.avg_params == doctest::Approx(23.5e9).epsilon(0.03));
  CHECK(c.dense.tokens == doctest::Approx(24.4e12).epsilon(0.03));
  CHECK(c.dense.lifetime_flops == doctest::Approx(8.14e24).epsilon(0.02));
  CHECK(c.sparse.avg_params == doctest::Approx(28.0e9).epsilon(0.03));
  CHECK(c.sparse.final_params == doctest::Approx(14.0e9).epsilon(0.03));
  CHECK(c.sparse.tokens == doctest::Approx(16.6e12).epsilon(0.03));
  CHECK(c.sparse.lifetime_flops == doctest::Approx(5.58e24).epsilon(0.02));
  CHECK(std::fabs(c.saving - 0.314) <= 0.005);
}

TEST_CASE("sparse lifetime compute never exceeds dense") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const ScalingLawFit f = random_fit(rng);
    const double target = f.E + 0.05 + u(rng);
    const auto c = compare_lifetime(f, target, std::pow(10.0, 9 + 6 * u(rng)), 0.8,
                                    1.0 + 3.0 * u(rng));
    CHECK(c.sparse.lifetime_flops <= c.dense.lifetime_flops * (1.0 + 1e-12));
  }
}

TEST_CASE("dense prescribed size shrinks as inference traffic grows") {
  const ScalingLawFit f = lawfit::chinchilla_rounded();
  double prev = solve_chinchilla(f, 1.9).avg_params;
  for (double t = 1e9; t <= 1e16; t *= 3.0) {
    const double n = solve_lifetime(f, 1.9, t, 0.0, 1.0).avg_params;
    CHECK(n <= prev * (1.0 + 1e-9));
    prev = n;
  }
}

TEST_CASE("lifetime objective is unimodal on the search interval") {
  for (const ScalingLawFit& f : {lawfit::chinchilla_rounded(), lawfit::chinchilla_unrounded()})
    for (double t_inf : {0.0, 1e12, 100e12, 1e15})
      for (double r : {1.0, 2.0, 4.0}) {
        const double target = 1.89;
        const double log_min = std::log(min_avg_params(f, target));
        std::vector<double> cost;
        const int n = 4000;
        for (int i = 1; i < n; ++i) {
          const double nn = std::exp(log_min + std::log(1e8) * i / n);
          cost.push_back(lifetime_flops(nn, tokens_for_loss(f, target, nn), nn / r, t_inf));
        }
        int direction_changes = 0;
        for (std::size_t i = 2; i < cost.size(); ++i)
          if ((cost[i] - cost[i - 1] > 0) != (cost[i - 1] - cost[i - 2] > 0)) ++direction_changes;
        CHECK(direction_changes == 1);
        const auto it = std::min_element(cost.begin(), cost.end());
        const double grid_best = *it;
        const Prescription p = solve_lifetime(f, target, t_inf, 0.5, r);
        CHECK(p.lifetime_flops <= grid_best * (1.0 + 1e-12));
      }
}

TEST_CASE("infeasible and invalid requests") {
  const ScalingLawFit f = lawfit::chinchilla_rounded();
  CHECK_THROWS_AS(solve_chinchilla(f, f.E), InfeasibleError);
  CHECK_THROWS_AS(solve_chinchilla(f, 1.0), InfeasibleError);
  CHECK_THROWS_AS(solve_lifetime(f, 1.6, 1e12, 0.5, 2.0), InfeasibleError);
  CHECK_THROWS_AS(solve_lifetime(f, 1.9, -1.0, 0.5, 2.0), ConfigError);
  CHECK_THROWS_AS(solve_lifetime(f, 1.9, 1e12, 0.5, 0.5), ConfigError);
  CHECK_THROWS_AS(solve_lifetime(f, 1.9, 1e12, 1.0, 2.0), ConfigError);
}

TEST_CASE("schedule compression of the canonical schedule") {
  const SparsityScheduleConfig base = canonical_schedule();
  CHECK(schedule_compression(base, 0.0) == 1.0);
  CHECK(schedule_compression(base, 0.8) == doctest::Approx(2.0).epsilon(0.025));
}
