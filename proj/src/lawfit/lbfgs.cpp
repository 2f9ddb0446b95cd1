#include "sparsescale/lawfit/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace sparsescale::lawfit {

std::string_view to_string(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::kGradientConverged: return "gradient_converged";
    case LbfgsStatus::kFunctionConverged: return "function_converged";
    case LbfgsStatus::kMaxIterations: return "max_iterations";
    case LbfgsStatus::kLineSearchFailed: return "line_search_failed";
  }
  return "?";
}

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

// A point along the search ray x + step * p.
struct Trial {
  double step = 0.0;
  double f = 0.0;
  double slope = 0.0;  // directional derivative g . p
  Vec x;
  Vec g;
  bool finite = true;
};

class LineSearch {
 public:
  LineSearch(const Objective& f, const LbfgsOptions& opt, const Vec& x0, const Vec& p, double f0,
             double slope0, int& evaluations)
      : f_(f), opt_(opt), x0_(x0), p_(p), f0_(f0), slope0_(slope0), evaluations_(evaluations) {}

  // Returns true and fills `out` when a step satisfying the Wolfe conditions (or
  // at least sufficient decrease once the budget runs out) is found.
  bool run(double initial_step, Trial& out) {
    Trial prev;
    prev.step = 0.0;
    prev.f = f0_;
    prev.slope = slope0_;
    double step = initial_step;
    for (int i = 0; budget_left(); ++i) {
      Trial cur = eval(step);
      if (!cur.finite) {
        step = 0.5 * (prev.step + step);
        continue;
      }
      if (cur.f > f0_ + opt_.c1 * step * slope0_ || (i > 0 && cur.f >= prev.f))
        return zoom(prev, cur, out);
      if (std::fabs(cur.slope) <= -opt_.c2 * slope0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, out);
      prev = std::move(cur);
      step *= 2.0;
    }
    return accept_fallback(prev, out);
  }

 private:
  bool budget_left() const { return used_ < opt_.max_line_search_evaluations; }

  Trial eval(double step) {
    Trial t;
    t.step = step;
    t.x.resize(x0_.size());
    for (std::size_t i = 0; i < x0_.size(); ++i) t.x[i] = x0_[i] + step * p_[i];
    t.g.assign(x0_.size(), 0.0);
    t.f = f_(t.x, t.g);
    ++used_;
    ++evaluations_;
    t.finite = std::isfinite(t.f);
    for (double gi : t.g) t.finite = t.finite && std::isfinite(gi);
    if (t.finite) t.slope = dot(t.g, p_);
    return t;
  }

  bool sufficient(const Trial& t) const {
    return t.step > 0.0 && t.f <= f0_ + opt_.c1 * t.step * slope0_;
  }

  bool accept_fallback(Trial& best, Trial& out) {
    if (sufficient(best) && best.f < f0_) {
      out = std::move(best);
      return true;
    }
    return false;
  }

  static double cubic_min(const Trial& a, const Trial& b) {
    const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.step - b.step);
    const double disc = d1 * d1 - a.slope * b.slope;
    if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
    return b.step - (b.step - a.step) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
  }

  bool zoom(Trial lo, Trial hi, Trial& out) {
    while (budget_left()) {
      const double left = std::min(lo.step, hi.step);
      const double right = std::max(lo.step, hi.step);
      const double width = right - left;
      if (width <= 1e-16 * std::max(1.0, right)) break;
      double step = hi.finite ? cubic_min(lo, hi) : std::numeric_limits<double>::quiet_NaN();
      if (!std::isfinite(step) || step < left + 0.1 * width || step > right - 0.1 * width)
        step = 0.5 * (lo.step + hi.step);
      Trial cur = eval(step);
      if (!cur.finite) {
        hi = std::move(cur);
        continue;
      }
      if (cur.f > f0_ + opt_.c1 * step * slope0_ || cur.f >= lo.f) {
        hi = std::move(cur);
        continue;
      }
      if (std::fabs(cur.slope) <= -opt_.c2 * slope0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    return accept_fallback(lo, out);
  }

  const Objective& f_;
  const LbfgsOptions& opt_;
  const Vec& x0_;
  const Vec& p_;
  double f0_;
  double slope0_;
  int& evaluations_;
  int used_ = 0;
};

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, Vec x0, const LbfgsOptions& opt) {
  LbfgsResult res;
  const std::size_t n = x0.size();
  Vec x = std::move(x0);
  Vec g(n, 0.0);
  double fx = f(x, g);
  res.evaluations = 1;
  if (!std::isfinite(fx)) {
    res.x = x;
    res.value = fx;
    res.status = LbfgsStatus::kLineSearchFailed;
    return res;
  }

  std::deque<Vec> s_hist, y_hist;
  std::deque<double> rho_hist;
  Vec p(n), alpha_buf;
  res.status = LbfgsStatus::kMaxIterations;

  if (max_abs(g) <= opt.gradient_tolerance) {
    res.status = LbfgsStatus::kGradientConverged;
  } else {
    for (int iter = 1; iter <= opt.max_iterations; ++iter) {
      // Two-loop recursion: p = -H g.
      Vec q = g;
      const std::size_t m = s_hist.size();
      alpha_buf.assign(m, 0.0);
      for (std::size_t j = m; j-- > 0;) {
        alpha_buf[j] = rho_hist[j] * dot(s_hist[j], q);
        for (std::size_t i = 0; i < n; ++i) q[i] -= alpha_buf[j] * y_hist[j][i];
      }
      if (m > 0) {
        const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
        for (double& qi : q) qi *= gamma;
      }
      for (std::size_t j = 0; j < m; ++j) {
        const double beta = rho_hist[j] * dot(y_hist[j], q);
        for (std::size_t i = 0; i < n; ++i) q[i] += s_hist[j][i] * (alpha_buf[j] - beta);
      }
      for (std::size_t i = 0; i < n; ++i) p[i] = -q[i];

      double slope = dot(g, p);
      if (!(slope < 0.0)) {
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        for (std::size_t i = 0; i < n; ++i) p[i] = -g[i];
        slope = dot(g, p);
      }
      const double initial =
          s_hist.empty() ? std::min(1.0, 1.0 / std::sqrt(dot(g, g))) : 1.0;

      Trial next;
      LineSearch ls(f, opt, x, p, fx, slope, res.evaluations);
      bool ok = ls.run(initial, next);
      if (!ok && !s_hist.empty()) {
        // Retry once along steepest descent with fresh curvature memory.
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        for (std::size_t i = 0; i < n; ++i) p[i] = -g[i];
        slope = dot(g, p);
        LineSearch retry(f, opt, x, p, fx, slope, res.evaluations);
        ok = retry.run(std::min(1.0, 1.0 / std::sqrt(dot(g, g))), next);
      }
      res.iterations = iter;
      if (!ok) {
        // No acceptable step along a descent direction. When the predicted
        // decrease of a unit step is already negligible relative to f, the failure
        // is rounding noise at the minimum rather than a bad search.
        res.status = std::fabs(slope) <= 1e-12 * std::max(1.0, std::fabs(fx))
                         ? LbfgsStatus::kFunctionConverged
                         : LbfgsStatus::kLineSearchFailed;
        break;
      }

      Vec s(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = next.x[i] - x[i];
        y[i] = next.g[i] - g[i];
      }
      const double sy = dot(s, y);
      const double decrease = fx - next.f;
      x = std::move(next.x);
      g = std::move(next.g);
      const double f_prev = fx;
      fx = next.f;
      if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
        s_hist.push_back(std::move(s));
        y_hist.push_back(std::move(y));
        rho_hist.push_back(1.0 / sy);
        if (static_cast<int>(s_hist.size()) > opt.history) {
          s_hist.pop_front();
          y_hist.pop_front();
          rho_hist.pop_front();
        }
      }
      if (max_abs(g) <= opt.gradient_tolerance) {
        res.status = LbfgsStatus::kGradientConverged;
        break;
      }
      if (decrease <= opt.function_tolerance * std::max({std::fabs(f_prev), std::fabs(fx), 1.0})) {
        res.status = LbfgsStatus::kFunctionConverged;
        break;
      }
    }
  }
  res.x = std::move(x);
  res.value = fx;
  return res;
}

}  // namespace sparsescale::lawfit
