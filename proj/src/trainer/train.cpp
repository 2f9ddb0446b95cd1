#include "sparsescale/trainer/train.hpp"

#include <cmath>
#include <cstdlib>

#include "sparsescale/core/errors.hpp"
#include "sparsescale/core/schedule.hpp"
#include "sparsescale/trainer/prune.hpp"

namespace sparsescale::trainer {

SparsityScheduleConfig resolved_schedule(const TrainConfig& cfg) {
  SparsityScheduleConfig s = cfg.schedule;
  s.shape = TinyLM::shape_of(cfg.model);
  s.tokens_per_step = cfg.batch_size;
  return s;
}

Batch sample_batch(std::span<const int> tokens, int context, std::size_t examples,
                   std::mt19937_64& rng) {
  const auto c = static_cast<std::size_t>(context);
  if (tokens.size() <= c) throw ConfigError("training split is shorter than the context");
  std::uniform_int_distribution<std::size_t> pos(c, tokens.size() - 1);
  Batch b;
  b.context = context;
  b.inputs.reserve(examples * c);
  b.targets.reserve(examples);
  for (std::size_t i = 0; i < examples; ++i) {
    const std::size_t p = pos(rng);
    b.inputs.insert(b.inputs.end(), tokens.begin() + static_cast<std::ptrdiff_t>(p - c),
                    tokens.begin() + static_cast<std::ptrdiff_t>(p));
    b.targets.push_back(tokens[p]);
  }
  return b;
}

TrainResult run_sparse_pretraining(const TrainConfig& cfg_in, const Corpus& corpus,
                                   const std::function<void(const StepEvent&)>& on_step,
                                   TinyLM* final_model) {
  TrainConfig cfg = cfg_in;
  cfg.model.vocab = corpus.vocab.size();
  if (cfg.batch_size < 1) throw ConfigError("batch size must be positive");
  if (cfg.log_every < 1) throw ConfigError("log_every must be positive");

  TrainResult res;
  const SparsityScheduleConfig schedule = resolved_schedule(cfg);
  res.planned = build_schedule(schedule);

  TinyLM model(cfg.model, cfg.seed);
  std::int64_t total_steps = 0;
  for (const Segment& s : res.planned.segments) total_steps += s.steps;
  Optimizer opt(cfg.optimizer, model.params().size(), model.mask().size(), total_steps);

  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    0x5eedu};
  std::mt19937_64 data_rng(seq);

  res.executed.shape = res.planned.shape;
  res.executed.accounting = res.planned.accounting;
  res.executed.tokens_per_step = res.planned.tokens_per_step;

  std::vector<double> grad;
  std::int64_t step = 0;
  Count tokens = 0;
  double compute = 0.0;
  double window_loss = 0.0;
  std::int64_t window_steps = 0;

  for (const Segment& seg : res.planned.segments) {
    bool pruned = false;
    if (seg.prunable_active < model.active_prunable()) {
      global_magnitude_prune(model, seg.prunable_active);
      opt.on_prune(model.mask());
      pruned = true;
      ++res.pruning_events;
    }
    Segment done = seg;
    done.prunable_active = model.active_prunable();
    done.active_params = active_params_for(schedule, done.prunable_active);
    done.steps = 0;
    done.tokens = 0;

    for (Count i = 0; i < seg.steps; ++i) {
      const Batch batch =
          sample_batch(corpus.train, cfg.model.context, static_cast<std::size_t>(cfg.batch_size), data_rng);
      const double loss = model.loss_and_gradient(batch, &grad);
      opt.step(model.kernels(), model.params(), grad, model.mask(), step);
      ++done.steps;
      done.tokens += cfg.batch_size;
      tokens += cfg.batch_size;
      compute += 6.0 * static_cast<double>(done.active_params) * static_cast<double>(cfg.batch_size);
      window_loss += loss;
      ++window_steps;
      ++step;
      if (step % cfg.log_every == 0 || step == total_steps) {
        CurvePoint pt;
        pt.step = step;
        pt.tokens = tokens;
        pt.compute = compute;
        pt.active_params = done.active_params;
        pt.train_loss = window_loss / static_cast<double>(window_steps);
        pt.eval_loss = eval_loss(model, corpus.held_out, cfg.eval_examples);
        res.curve.push_back(pt);
        res.final_train_loss = pt.train_loss;
        window_loss = 0.0;
        window_steps = 0;
      }
      if (on_step) {
        StepEvent ev;
        ev.step = step;
        ev.phase = seg.phase;
        ev.pruned = pruned && i == 0;
        ev.target_prunable = seg.prunable_active;
        ev.model = &model;
        on_step(ev);
      }
    }
    res.executed.segments.push_back(done);
  }

  res.final_eval_loss = eval_loss(model, corpus.held_out);
  RunRecord& r = res.record;
  r.label = cfg.label;
  r.avg_params = average_params(res.executed);
  r.total_tokens = static_cast<double>(res.executed.total_tokens());
  r.final_loss = res.final_eval_loss;
  r.sparsity = schedule.target_sparsity;
  r.final_nonzero_params = static_cast<double>(res.executed.final_active());
  r.shape = schedule.shape;
  r.source = RunSource::kMeasured;
  if (final_model) *final_model = std::move(model);
  return res;
}

TinyLMConfig match_dense_model(const TinyLMConfig& base, Count target_prunable) {
  TinyLMConfig best = base;
  Count best_gap = -1;
  for (int h = 1; h <= 4 * base.hidden + 64; ++h) {
    TinyLMConfig c = base;
    c.hidden = h;
    const Count gap = std::llabs(TinyLM::shape_of(c).prunable - target_prunable);
    if (best_gap < 0 || gap < best_gap) {
      best = c;
      best_gap = gap;
    }
  }
  return best;
}

TrainConfig matched_dense_config(const TrainConfig& sparse_cfg, const TrainResult& sparse_result) {
  TrainConfig dense = sparse_cfg;
  const double avg = sparse_result.record.avg_params;
  // Under all-parameter accounting the average includes the nonprunable block.
  const double prunable_avg = sparse_result.executed.accounting == Accounting::kAllParams
                                  ? avg - static_cast<double>(sparse_result.executed.shape.nonprunable)
                                  : avg;
  dense.model = match_dense_model(sparse_cfg.model, std::llround(prunable_avg));
  dense.schedule.target_sparsity = 0.0;
  dense.schedule.total_compute = effective_compute(sparse_result.executed);
  dense.label = sparse_cfg.label.empty() ? "matched_dense" : sparse_cfg.label + "_matched_dense";
  return dense;
}

}  // namespace sparsescale::trainer
