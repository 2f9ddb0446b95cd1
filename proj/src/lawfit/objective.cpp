#include "sparsescale/lawfit/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "objective_internal.hpp"
#include "sparsescale/core/errors.hpp"

namespace sparsescale::lawfit {

double huber(double r, double delta) {
  const double a = std::fabs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

double huber_derivative(double r, double delta) {
  if (r > delta) return delta;
  if (r < -delta) return -delta;
  return r;
}

UnifiedParams to_params(const ScalingLawFit& f) {
  return {std::log(f.A), std::log(f.B), std::log(f.E), f.alpha, f.beta};
}

ScalingLawFit from_params(const UnifiedParams& p) {
  ScalingLawFit f;
  f.A = std::exp(p[0]);
  f.B = std::exp(p[1]);
  f.E = std::exp(p[2]);
  f.alpha = p[3];
  f.beta = p[4];
  return f;
}

FrantarParams to_params(const FrantarLawFit& f) {
  return {std::log(f.a_S), f.b_S, std::log(f.c_S), f.b_N, std::log(f.a_D), f.b_D, std::log(f.c)};
}

FrantarLawFit from_params(const FrantarParams& p) {
  FrantarLawFit f;
  f.a_S = std::exp(p[0]);
  f.b_S = p[1];
  f.c_S = std::exp(p[2]);
  f.b_N = p[3];
  f.a_D = std::exp(p[4]);
  f.b_D = p[5];
  f.c = std::exp(p[6]);
  return f;
}

namespace detail {
namespace {

void require(bool ok, const RunRecord& r, const char* what) {
  if (!ok) throw IllPosedError("record '" + r.label + "': " + what);
}

// Stable log(sum exp(v_i)) with the softmax weights written to w.
template <std::size_t K>
double log_sum_exp(const double (&v)[K], double (&w)[K]) {
  const double m = *std::max_element(v, v + K);
  double s = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    w[i] = std::exp(v[i] - m);
    s += w[i];
  }
  for (std::size_t i = 0; i < K; ++i) w[i] /= s;
  return m + std::log(s);
}

}  // namespace

UnifiedData prepare_unified(std::span<const RunRecord> data) {
  if (data.empty()) throw IllPosedError("dataset is empty");
  UnifiedData d;
  for (const RunRecord& r : data) {
    require(r.final_loss > 0.0, r, "final_loss must be positive");
    require(r.avg_params > 0.0, r, "avg_params must be positive");
    require(r.total_tokens > 0.0, r, "total_tokens must be positive");
    d.log_n.push_back(std::log(r.avg_params));
    d.log_d.push_back(std::log(r.total_tokens));
    d.log_loss.push_back(std::log(r.final_loss));
  }
  return d;
}

FrantarData prepare_frantar(std::span<const RunRecord> data) {
  if (data.empty()) throw IllPosedError("dataset is empty");
  FrantarData d;
  for (const RunRecord& r : data) {
    require(r.final_loss > 0.0, r, "final_loss must be positive");
    require(r.final_nonzero_params > 0.0, r, "final_nonzero_params must be positive");
    require(r.total_tokens > 0.0, r, "total_tokens must be positive");
    require(r.sparsity >= 0.0 && r.sparsity < 1.0, r, "sparsity must lie in [0, 1)");
    d.log_keep.push_back(std::log1p(-r.sparsity));
    d.log_n.push_back(std::log(r.final_nonzero_params));
    d.log_d.push_back(std::log(r.total_tokens));
    d.log_loss.push_back(std::log(r.final_loss));
  }
  return d;
}

double unified_objective(const double* p, const UnifiedData& d, double delta, double* grad) {
  const double a = p[0], b = p[1], e = p[2], alpha = p[3], beta = p[4];
  if (grad) std::fill(grad, grad + 5, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < d.log_n.size(); ++i) {
    const double terms[3] = {a - alpha * d.log_n[i], b - beta * d.log_d[i], e};
    double w[3];
    const double r = log_sum_exp(terms, w) - d.log_loss[i];
    total += huber(r, delta);
    if (grad) {
      const double h = huber_derivative(r, delta);
      grad[0] += h * w[0];
      grad[1] += h * w[1];
      grad[2] += h * w[2];
      grad[3] -= h * w[0] * d.log_n[i];
      grad[4] -= h * w[1] * d.log_d[i];
    }
  }
  return total;
}

double frantar_objective(const double* p, const FrantarData& d, double delta, double* grad) {
  const double la_s = p[0], b_s = p[1], lc_s = p[2], b_n = p[3], la_d = p[4], b_d = p[5],
               lc = p[6];
  if (grad) std::fill(grad, grad + 7, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < d.log_n.size(); ++i) {
    const double inner[2] = {la_s + b_s * d.log_keep[i], lc_s};
    double v[2];
    const double log_sparse = log_sum_exp(inner, v);
    const double outer[3] = {log_sparse - b_n * d.log_n[i], b_d * (la_d - d.log_d[i]), lc};
    double w[3];
    const double r = log_sum_exp(outer, w) - d.log_loss[i];
    total += huber(r, delta);
    if (grad) {
      const double h = huber_derivative(r, delta);
      grad[0] += h * w[0] * v[0];
      grad[1] += h * w[0] * v[0] * d.log_keep[i];
      grad[2] += h * w[0] * v[1];
      grad[3] -= h * w[0] * d.log_n[i];
      grad[4] += h * w[1] * b_d;
      grad[5] += h * w[1] * (la_d - d.log_d[i]);
      grad[6] += h * w[2];
    }
  }
  return total;
}

}  // namespace detail

double huber_objective(const UnifiedParams& p, std::span<const RunRecord> data, double delta,
                       UnifiedParams* grad) {
  const detail::UnifiedData d = detail::prepare_unified(data);
  return detail::unified_objective(p.data(), d, delta, grad ? grad->data() : nullptr);
}

double frantar_objective(const FrantarParams& p, std::span<const RunRecord> data, double delta,
                         FrantarParams* grad) {
  const detail::FrantarData d = detail::prepare_frantar(data);
  return detail::frantar_objective(p.data(), d, delta, grad ? grad->data() : nullptr);
}

}  // namespace sparsescale::lawfit
