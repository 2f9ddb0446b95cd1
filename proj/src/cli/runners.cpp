#include "sparsescale/cli/runners.hpp"

#include <cstdio>

#include "sparsescale/core/config_file.hpp"
#include "sparsescale/core/schedule.hpp"

namespace sparsescale::cli {
namespace {

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

TheorySimRunner::TheorySimRunner(theorysim::TheoryParams params, SparsityScheduleConfig base,
                                 theorysim::SimulationOptions options, double tokens_per_param)
    : params_(params), base_(base), options_(options), tokens_per_param_(tokens_per_param) {
  params_.validate();
}

std::string TheorySimRunner::fingerprint() const {
  return "A=" + number(params_.A) + ";alpha=" + number(params_.alpha) +
         ";burn_in=" + number(options_.burn_in_fraction) +
         ";initial_compute=" + number(options_.initial_compute) +
         ";increment=" + number(options_.max_increment_fraction) +
         ";tokens_per_param=" + number(tokens_per_param_) + ";" + to_config_text(base_);
}

SparsityScheduleConfig TheorySimRunner::schedule(const SweepPoint& point) const {
  return schedule_for(point, base_, tokens_per_param_);
}

RunOutput TheorySimRunner::run(const SweepPoint& point, std::uint64_t /*seed*/) const {
  const SparsityScheduleConfig cfg = schedule(point);
  const ParamTrajectory traj = build_schedule(cfg);
  const theorysim::SimulationResult sim = theorysim::simulate_trajectory(params_, traj, options_);
  RunOutput out;
  RunRecord& r = out.record;
  r.label = point.canonical();
  r.avg_params = average_params(traj);
  r.total_tokens = static_cast<double>(traj.total_tokens());
  r.final_loss = sim.curve.back().loss;
  r.sparsity = cfg.target_sparsity;
  r.final_nonzero_params = static_cast<double>(traj.final_active());
  r.shape = cfg.shape;
  r.source = RunSource::kSimulated;
  out.effective_compute = effective_compute(traj);
  return out;
}

TrainerRunner::TrainerRunner(trainer::TrainConfig base,
                             std::shared_ptr<const trainer::Corpus> corpus, double tokens_per_param)
    : base_(std::move(base)), corpus_(std::move(corpus)), tokens_per_param_(tokens_per_param) {
  base_.model.vocab = corpus_->vocab.size();
  base_.model.validate();
}

std::string TrainerRunner::fingerprint() const {
  const trainer::TinyLMConfig& m = base_.model;
  const trainer::OptimizerConfig& o = base_.optimizer;
  const std::string corpus_id =
      hex(stable_hash(corpus_->vocab.symbols() + "|" + std::to_string(corpus_->train.size()) + "|" +
                      std::to_string(corpus_->held_out.size())));
  return "vocab=" + std::to_string(m.vocab) + ";context=" + std::to_string(m.context) +
         ";embed=" + std::to_string(m.embed) + ";hidden=" + std::to_string(m.hidden) +
         ";output_init_scale=" + number(m.output_init_scale) +
         ";optimizer=" + std::string(trainer::to_string(o.kind)) +
         ";learning_rate=" + number(o.learning_rate) + ";beta1=" + number(o.beta1) +
         ";beta2=" + number(o.beta2) + ";eps=" + number(o.eps) +
         ";lr_schedule=" + std::string(trainer::to_string(o.schedule)) +
         ";warmup_steps=" + std::to_string(o.warmup_steps) +
         ";min_lr_fraction=" + number(o.min_lr_fraction) +
         ";batch_size=" + std::to_string(base_.batch_size) +
         ";eval_examples=" + std::to_string(base_.eval_examples) +
         ";tokens_per_param=" + number(tokens_per_param_) + ";corpus=" + corpus_id + ";" +
         to_config_text(trainer::resolved_schedule(base_));
}

trainer::TrainConfig TrainerRunner::config(const SweepPoint& point, std::uint64_t seed) const {
  trainer::TrainConfig cfg = base_;
  if (point.batch_size > 0) cfg.batch_size = point.batch_size;
  if (point.learning_rate > 0.0) cfg.optimizer.learning_rate = point.learning_rate;
  cfg.schedule = schedule_for(point, trainer::resolved_schedule(cfg), tokens_per_param_);
  cfg.seed = seed;
  cfg.label = point.canonical();
  return cfg;
}

RunOutput TrainerRunner::run(const SweepPoint& point, std::uint64_t seed) const {
  const trainer::TrainResult res = trainer::run_sparse_pretraining(config(point, seed), *corpus_);
  return {res.record, effective_compute(res.executed)};
}

}  // namespace sparsescale::cli
