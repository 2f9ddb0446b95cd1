#include "sparsescale/theorysim/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "sparsescale/core/errors.hpp"

namespace sparsescale::theorysim {

void TheoryParams::validate() const {
  if (!(A > 0.0)) throw ConfigError("theory constant A must be positive");
  if (!(alpha > 0.0)) throw ConfigError("theory exponent alpha must be positive");
}

double loss_of_compute(const TheoryParams& p, double compute) {
  return std::pow(p.A / compute, p.alpha);
}

double delta_loss(const TheoryParams& p, double compute_prefix, double delta_compute) {
  return -p.alpha * std::pow(p.A, p.alpha) * std::pow(compute_prefix, -p.alpha - 1.0) *
         delta_compute;
}

namespace {

double segment_compute(const Segment& s, const SimulationOptions& opt) {
  return opt.flops_per_param_token * static_cast<double>(s.active_params) *
         static_cast<double>(s.tokens);
}

void validate(const TheoryParams& p, const ParamTrajectory& traj, const SimulationOptions& opt) {
  p.validate();
  if (traj.empty()) throw IllPosedError("trajectory is empty");
  if (!(opt.burn_in_fraction >= 0.0 && opt.burn_in_fraction < 1.0))
    throw ConfigError("burn-in fraction must lie in [0, 1)");
  if (!(opt.initial_compute >= 0.0)) throw ConfigError("initial compute must be non-negative");
  if (!(opt.max_increment_fraction > 0.0))
    throw ConfigError("max increment fraction must be positive");
}

}  // namespace

SimulationResult simulate_trajectory(const TheoryParams& p, const ParamTrajectory& traj,
                                     const SimulationOptions& opt) {
  validate(p, traj, opt);
  SimulationResult res;
  for (const Segment& s : traj.segments) res.total_compute += segment_compute(s, opt);
  if (!(res.total_compute > 0.0)) throw IllPosedError("trajectory has zero compute");

  const double burn = opt.burn_in_fraction * res.total_compute;
  res.start_compute = opt.initial_compute + burn;
  if (!(res.start_compute > 0.0))
    throw IllPosedError(
        "simulation would start at zero compute, where the loss model is singular; use a "
        "positive burn-in or initial compute");

  const double max_step = opt.max_increment_fraction * res.total_compute;
  double c = res.start_compute;
  double loss = loss_of_compute(p, c);
  res.curve.push_back({c, loss});

  double skipped = 0.0;  // trajectory compute consumed by the burn-in so far
  for (const Segment& s : traj.segments) {
    double remaining = segment_compute(s, opt);
    const double skip = std::min(remaining, burn - skipped);
    skipped += skip;
    remaining -= skip;
    if (remaining <= 0.0) continue;
    const auto parts = static_cast<long long>(std::ceil(remaining / max_step));
    const double part = remaining / static_cast<double>(parts);
    for (long long i = 0; i < parts; ++i) {
      const double dl = delta_loss(p, c, part);
      loss += dl;
      res.total_delta_loss += dl;
      c += part;
      res.curve.push_back({c, loss});
    }
  }
  return res;
}

std::vector<double> coefficient_series(const TheoryParams& p, const ParamTrajectory& traj,
                                       const SimulationOptions& opt) {
  validate(p, traj, opt);
  std::vector<double> out;
  double c = opt.initial_compute;
  for (const Segment& s : traj.segments) {
    c += segment_compute(s, opt);
    out.push_back(std::pow(c, -p.alpha - 1.0));
  }
  const double first = out.front();
  if (!(first > 0.0) || !std::isfinite(first))
    throw IllPosedError("coefficient series is singular at the first segment");
  for (double& v : out) v /= first;
  return out;
}

double flatness(const std::vector<double>& series, std::size_t from_index) {
  if (from_index >= series.size()) throw IllPosedError("flatness range is empty");
  const auto begin = series.begin() + static_cast<std::ptrdiff_t>(from_index);
  const auto [lo, hi] = std::minmax_element(begin, series.end());
  const double mean =
      std::accumulate(begin, series.end(), 0.0) / static_cast<double>(series.end() - begin);
  return (*hi - *lo) / mean;
}

namespace {

double negated_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw IllPosedError("all compute values on one side are equal");
  return -sxy / sxx;
}

}  // namespace

PiecewiseAlpha fit_piecewise_alpha(const std::vector<CurvePoint>& curve, double breakpoint) {
  std::vector<double> x1, y1, x2, y2;
  for (const CurvePoint& pt : curve) {
    if (!(pt.compute > 0.0 && pt.loss > 0.0))
      throw IllPosedError("curve points must have positive compute and loss");
    auto& xs = pt.compute < breakpoint ? x1 : x2;
    auto& ys = pt.compute < breakpoint ? y1 : y2;
    xs.push_back(std::log(pt.compute));
    ys.push_back(std::log(pt.loss));
  }
  if (x1.size() < 3 || x2.size() < 3)
    throw IllPosedError("piecewise fit needs at least 3 points on each side of the breakpoint");
  return {negated_slope(x1, y1), negated_slope(x2, y2)};
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "cumulative_compute,loss\n";
  out.precision(17);
  for (const CurvePoint& pt : curve) out << pt.compute << ',' << pt.loss << '\n';
}

}  // namespace sparsescale::theorysim
