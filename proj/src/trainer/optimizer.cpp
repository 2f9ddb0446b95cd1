#include "sparsescale/trainer/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sparsescale/core/errors.hpp"

namespace sparsescale::trainer {

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::kSgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_string(std::string_view s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + std::string(s) + "' (expected sgd|adam)");
}

std::string_view to_string(LrSchedule s) {
  return s == LrSchedule::kConstant ? "constant" : "warmup_cosine";
}

LrSchedule lr_schedule_from_string(std::string_view s) {
  if (s == "constant") return LrSchedule::kConstant;
  if (s == "warmup_cosine") return LrSchedule::kWarmupCosine;
  throw ConfigError("unknown learning-rate schedule '" + std::string(s) +
                    "' (expected constant|warmup_cosine)");
}

Optimizer::Optimizer(const OptimizerConfig& cfg, std::size_t params, std::size_t prunable,
                     std::int64_t total_steps)
    : cfg_(cfg), prunable_(prunable), total_steps_(total_steps) {
  if (!(cfg.learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  if (prunable > params) throw ConfigError("prunable block exceeds the parameter count");
  ones_.assign(params - prunable, 1);
  if (cfg_.kind == OptimizerKind::kAdam) {
    m_.assign(params, 0.0);
    v_.assign(params, 0.0);
  }
}

double Optimizer::learning_rate_at(std::int64_t step) const {
  if (cfg_.schedule == LrSchedule::kConstant) return cfg_.learning_rate;
  if (step < cfg_.warmup_steps)
    return cfg_.learning_rate * static_cast<double>(step + 1) /
           static_cast<double>(cfg_.warmup_steps);
  const double span = static_cast<double>(std::max<std::int64_t>(1, total_steps_ - cfg_.warmup_steps));
  const double progress = std::min(1.0, static_cast<double>(step - cfg_.warmup_steps) / span);
  const double floor = cfg_.min_lr_fraction;
  return cfg_.learning_rate *
         (floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

void Optimizer::step(const kernels::KernelTable& kt, std::span<double> params,
                     std::span<const double> grad, std::span<const std::uint8_t> mask,
                     std::int64_t step) {
  const double lr = learning_rate_at(step);
  const std::size_t rest = params.size() - prunable_;
  if (cfg_.kind == OptimizerKind::kSgd) {
    kt.masked_sgd(params.data(), grad.data(), mask.data(), lr, prunable_);
    kt.axpy(-lr, grad.data() + prunable_, params.data() + prunable_, rest);
    return;
  }
  ++adam_t_;
  kernels::AdamStep st;
  st.lr = lr;
  st.beta1 = cfg_.beta1;
  st.beta2 = cfg_.beta2;
  st.eps = cfg_.eps;
  st.bias1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(adam_t_));
  st.bias2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(adam_t_));
  kt.masked_adam(params.data(), m_.data(), v_.data(), grad.data(), mask.data(), st, prunable_);
  kt.masked_adam(params.data() + prunable_, m_.data() + prunable_, v_.data() + prunable_,
                 grad.data() + prunable_, ones_.data(), st, rest);
}

void Optimizer::on_prune(std::span<const std::uint8_t> mask) {
  if (m_.empty()) return;
  for (std::size_t i = 0; i < prunable_; ++i)
    if (!mask[i]) m_[i] = v_[i] = 0.0;
}

}  // namespace sparsescale::trainer
