#include "sparsescale/trainer/tiny_lm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sparsescale/core/errors.hpp"

namespace sparsescale::trainer {

void TinyLMConfig::validate() const {
  if (vocab < 2) throw ConfigError("vocabulary needs at least 2 symbols");
  if (context < 1 || embed < 1 || hidden < 1)
    throw ConfigError("context, embed and hidden must be positive");
  if (!(output_init_scale >= 0.0)) throw ConfigError("output_init_scale must be non-negative");
}

ModelShape TinyLM::shape_of(const TinyLMConfig& c) {
  const Count in = static_cast<Count>(c.context) * c.embed;
  const Count prunable = c.hidden * in + static_cast<Count>(c.hidden) * c.hidden +
                         static_cast<Count>(c.vocab) * c.hidden;
  const Count nonprunable = static_cast<Count>(c.vocab) * c.embed + 2 * c.hidden + c.vocab;
  return {prunable, nonprunable};
}

TinyLM::TinyLM(const TinyLMConfig& cfg, std::uint64_t seed, const kernels::KernelTable& kt)
    : cfg_(cfg), kt_(&kt) {
  cfg_.validate();
  const ModelShape s = shape_of(cfg_);
  params_.assign(static_cast<std::size_t>(s.total()), 0.0);
  mask_.assign(static_cast<std::size_t>(s.prunable), 1);

  std::mt19937_64 rng(seed);
  auto glorot = [&](std::size_t offset, std::size_t rows, std::size_t cols, double scale) {
    const double limit = scale * std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (std::size_t i = 0; i < rows * cols; ++i) params_[offset + i] = u(rng);
  };
  glorot(w1_offset(), cfg_.hidden, in_width(), 1.0);
  glorot(w2_offset(), cfg_.hidden, cfg_.hidden, 1.0);
  glorot(w3_offset(), cfg_.vocab, cfg_.hidden, cfg_.output_init_scale);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (std::size_t i = 0; i < emb_size(); ++i) params_[emb_offset() + i] = n01(rng);
  // Biases start at zero.
}

Count TinyLM::active_prunable() const {
  return static_cast<Count>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

void TinyLM::apply_mask() { kt_->apply_mask(params_.data(), mask_.data(), mask_.size()); }

void TinyLM::assign(std::vector<double> params, std::vector<std::uint8_t> mask) {
  if (params.size() != params_.size() || mask.size() != mask_.size())
    throw ConfigError("parameter or mask size does not match the model configuration");
  params_ = std::move(params);
  mask_ = std::move(mask);
}

double TinyLM::loss_and_gradient(const Batch& batch, std::vector<double>* grad) const {
  const std::size_t B = batch.size();
  const std::size_t C = static_cast<std::size_t>(cfg_.context);
  const std::size_t E = static_cast<std::size_t>(cfg_.embed);
  const std::size_t H = static_cast<std::size_t>(cfg_.hidden);
  const std::size_t V = static_cast<std::size_t>(cfg_.vocab);
  const std::size_t I = in_width();
  if (B == 0) throw ConfigError("batch is empty");
  if (batch.context != cfg_.context || batch.inputs.size() != B * C)
    throw ConfigError("batch context does not match the model");
  for (int id : batch.inputs)
    if (id < 0 || id >= cfg_.vocab) throw ConfigError("batch token outside the vocabulary");
  for (int id : batch.targets)
    if (id < 0 || id >= cfg_.vocab) throw ConfigError("batch target outside the vocabulary");

  const kernels::KernelTable& kt = *kt_;
  const double* w1 = params_.data() + w1_offset();
  const double* w2 = params_.data() + w2_offset();
  const double* w3 = params_.data() + w3_offset();
  const double* emb = params_.data() + emb_offset();
  const double* b1 = params_.data() + b1_offset();
  const double* b2 = params_.data() + b2_offset();
  const double* b3 = params_.data() + b3_offset();

  // Forward.
  std::vector<double> x(B * I);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c) {
      const double* row = emb + static_cast<std::size_t>(batch.inputs[b * C + c]) * E;
      std::copy(row, row + E, x.begin() + static_cast<std::ptrdiff_t>(b * I + c * E));
    }
  std::vector<double> h1(B * H), h2(B * H), logits(B * V);
  kernels::gemm_abt(kt, x.data(), w1, h1.data(), B, H, I);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t j = 0; j < H; ++j) h1[b * H + j] = std::tanh(h1[b * H + j] + b1[j]);
  kernels::gemm_abt(kt, h1.data(), w2, h2.data(), B, H, H);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t j = 0; j < H; ++j) h2[b * H + j] = std::tanh(h2[b * H + j] + b2[j]);
  kernels::gemm_abt(kt, h2.data(), w3, logits.data(), B, V, H);

  double loss = 0.0;
  std::vector<double>& dlogits = logits;  // softmax written in place
  for (std::size_t b = 0; b < B; ++b) {
    double* z = logits.data() + b * V;
    double m = -INFINITY;
    for (std::size_t v = 0; v < V; ++v) {
      z[v] += b3[v];
      m = std::max(m, z[v]);
    }
    double s = 0.0;
    for (std::size_t v = 0; v < V; ++v) s += std::exp(z[v] - m);
    const double log_norm = m + std::log(s);
    const auto t = static_cast<std::size_t>(batch.targets[b]);
    loss += log_norm - z[t];
    if (grad) {
      for (std::size_t v = 0; v < V; ++v) z[v] = std::exp(z[v] - log_norm) / static_cast<double>(B);
      z[t] -= 1.0 / static_cast<double>(B);
    }
  }
  loss /= static_cast<double>(B);
  if (!grad) return loss;

  // Backward.
  grad->assign(params_.size(), 0.0);
  double* g = grad->data();
  double* gw1 = g + w1_offset();
  double* gw2 = g + w2_offset();
  double* gw3 = g + w3_offset();
  double* gemb = g + emb_offset();
  double* gb1 = g + b1_offset();
  double* gb2 = g + b2_offset();
  double* gb3 = g + b3_offset();

  kernels::gemm_atb_acc(kt, dlogits.data(), h2.data(), gw3, B, V, H);
  for (std::size_t b = 0; b < B; ++b) kt.axpy(1.0, dlogits.data() + b * V, gb3, V);

  std::vector<double> dz(B * H);
  kernels::gemm_ab(kt, dlogits.data(), w3, dz.data(), B, V, H);
  for (std::size_t i = 0; i < B * H; ++i) dz[i] *= 1.0 - h2[i] * h2[i];
  kernels::gemm_atb_acc(kt, dz.data(), h1.data(), gw2, B, H, H);
  for (std::size_t b = 0; b < B; ++b) kt.axpy(1.0, dz.data() + b * H, gb2, H);

  std::vector<double> dz1(B * H);
  kernels::gemm_ab(kt, dz.data(), w2, dz1.data(), B, H, H);
  for (std::size_t i = 0; i < B * H; ++i) dz1[i] *= 1.0 - h1[i] * h1[i];
  kernels::gemm_atb_acc(kt, dz1.data(), x.data(), gw1, B, H, I);
  for (std::size_t b = 0; b < B; ++b) kt.axpy(1.0, dz1.data() + b * H, gb1, H);

  std::vector<double> dx(B * I);
  kernels::gemm_ab(kt, dz1.data(), w1, dx.data(), B, H, I);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      kt.axpy(1.0, dx.data() + b * I + c * E,
              gemb + static_cast<std::size_t>(batch.inputs[b * C + c]) * E, E);

  kt.apply_mask(g, mask_.data(), mask_.size());
  return loss;
}

double eval_loss(const TinyLM& model, std::span<const int> tokens, std::size_t max_examples) {
  const auto C = static_cast<std::size_t>(model.config().context);
  if (tokens.size() <= C) throw IllPosedError("evaluation split has no position with full context");
  const std::size_t available = tokens.size() - C;
  const std::size_t n = max_examples == 0 ? available : std::min(available, max_examples);
  const double stride = static_cast<double>(available) / static_cast<double>(n);

  constexpr std::size_t kChunk = 512;
  double total = 0.0;
  for (std::size_t start = 0; start < n; start += kChunk) {
    Batch batch;
    batch.context = model.config().context;
    const std::size_t end = std::min(n, start + kChunk);
    for (std::size_t i = start; i < end; ++i) {
      const auto pos = C + static_cast<std::size_t>(static_cast<double>(i) * stride);
      batch.inputs.insert(batch.inputs.end(), tokens.begin() + static_cast<std::ptrdiff_t>(pos - C),
                          tokens.begin() + static_cast<std::ptrdiff_t>(pos));
      batch.targets.push_back(tokens[pos]);
    }
    total += model.loss_and_gradient(batch, nullptr) * static_cast<double>(batch.size());
  }
  return total / static_cast<double>(n);
}

}  // namespace sparsescale::trainer
