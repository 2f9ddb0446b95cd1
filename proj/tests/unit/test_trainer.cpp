#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "sparsescale/core/errors.hpp"
#include "sparsescale/core/schedule.hpp"
#include "sparsescale/trainer/checkpoint.hpp"
#include "sparsescale/trainer/corpus.hpp"
#include "sparsescale/trainer/optimizer.hpp"
#include "sparsescale/trainer/prune.hpp"
#include "sparsescale/trainer/tiny_lm.hpp"
#include "sparsescale/trainer/train.hpp"

using namespace sparsescale;
using namespace sparsescale::trainer;

namespace {

const std::string kText =
    "the quick brown fox jumps over the lazy dog. pack my box with five dozen liquor jugs! "
    "how vexingly quick daft zebras jump; sphinx of black quartz, judge my vow.\n";

std::string repeated_text(int copies) {
  std::string s;
  for (int i = 0; i < copies; ++i) s += kText;
  return s;
}

TinyLMConfig small_model(int vocab) {
  TinyLMConfig c;
  c.vocab = vocab;
  c.context = 3;
  c.embed = 4;
  c.hidden = 12;
  return c;
}

// Small sparse run: a few hundred steps with a 20-iteration pruning phase.
TrainConfig small_run(const Corpus& corpus, double sparsity, std::uint64_t seed = 7) {
  TrainConfig cfg;
  cfg.model = small_model(corpus.vocab.size());
  cfg.model.hidden = 24;
  cfg.batch_size = 16;
  cfg.seed = seed;
  cfg.log_every = 20;
  cfg.eval_examples = 256;
  cfg.schedule.target_sparsity = sparsity;
  cfg.schedule.dense_fraction = 0.25;
  cfg.schedule.prune_fraction = 0.5;
  cfg.schedule.steps_per_iteration = 5;
  cfg.schedule.accounting = Accounting::kPrunableOnly;
  const ModelShape shape = TinyLM::shape_of(cfg.model);
  // About 400 steps at the dense size.
  cfg.schedule.total_compute = 6.0 * static_cast<double>(shape.prunable) * 16.0 * 400.0;
  cfg.optimizer.learning_rate = 0.05;
  return cfg;
}

Batch fixed_batch(const Corpus& corpus, int context, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_batch(corpus.train, context, n, rng);
}

}  // namespace

TEST_CASE("magnitude pruning keeps the largest weights (hand example)") {
  std::vector<double> w{3.0, -1.0, 2.0, -4.0};
  std::vector<std::uint8_t> m(4, 1);
  magnitude_prune(w, m, 2);
  CHECK(w == std::vector<double>{3.0, 0.0, 0.0, -4.0});
  CHECK(m == std::vector<std::uint8_t>{1, 0, 0, 1});
}

TEST_CASE("magnitude pruning matches a sort-based oracle") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(1, 60);
  std::uniform_int_distribution<int> level(-5, 5);  // coarse levels force ties
  std::bernoulli_distribution active(0.8);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = len(rng);
    std::vector<double> w(n);
    std::vector<std::uint8_t> m(n);
    for (int i = 0; i < n; ++i) {
      m[i] = active(rng) ? 1 : 0;
      w[i] = m[i] ? 0.5 * level(rng) : 0.0;
    }
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (m[i]) idx.push_back(i);
    std::uniform_int_distribution<int> k_dist(0, static_cast<int>(idx.size()));
    const int keep = k_dist(rng);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return std::fabs(w[a]) > std::fabs(w[b]); });
    std::vector<std::uint8_t> expect(n, 0);
    for (int j = 0; j < keep; ++j) expect[idx[j]] = 1;
    std::vector<double> w2 = w;
    magnitude_prune(w2, m, keep);
    REQUIRE(m == expect);
    for (int i = 0; i < n; ++i) CHECK(w2[i] == (expect[i] ? w[i] : 0.0));
  }
}

TEST_CASE("magnitude pruning edge cases") {
  std::vector<double> w{1.0, -2.0, 3.0};
  std::vector<std::uint8_t> m(3, 1);
  auto w0 = w;
  magnitude_prune(w, m, 3);
  CHECK(w == w0);
  CHECK_THROWS_AS(magnitude_prune(w, m, 4), ConfigError);
  CHECK_THROWS_AS(magnitude_prune(w, m, -1), ConfigError);
  magnitude_prune(w, m, 0);
  CHECK(std::count(m.begin(), m.end(), 1) == 0);
}

TEST_CASE("global pruning hits the exact target and zeroes pruned weights") {
  const Corpus corpus = corpus_from_text(repeated_text(4));
  TinyLM model(small_model(corpus.vocab.size()), 3);
  const Count target = model.prunable_count() / 3;
  global_magnitude_prune(model, target);
  CHECK(model.active_prunable() == target);
  for (std::size_t i = 0; i < model.mask().size(); ++i)
    if (!model.mask()[i]) CHECK(model.params()[i] == 0.0);
}

TEST_CASE("model parameter layout") {
  TinyLMConfig c;
  const ModelShape s = TinyLM::shape_of(c);
  CHECK(s.prunable == 224 * 8 * 16 + 224 * 224 + 75 * 224);
  CHECK(s.nonprunable == 75 * 16 + 224 + 224 + 75);
  TinyLM m(c, 0);
  CHECK(m.shape().prunable == s.prunable);
  CHECK(m.params().size() == static_cast<std::size_t>(s.total()));
  CHECK(m.b3_offset() + 75 == m.params().size());
}

TEST_CASE("initial loss is close to ln V and exactly ln V with zero output weights") {
  const Corpus corpus = corpus_from_text(repeated_text(4));
  TinyLMConfig c = small_model(corpus.vocab.size());
  const Batch b = fixed_batch(corpus, c.context, 64, 1);
  TinyLM m(c, 5);
  CHECK(m.loss_and_gradient(b, nullptr) == doctest::Approx(std::log(c.vocab)).epsilon(0.05));
  c.output_init_scale = 0.0;
  TinyLM z(c, 5);
  CHECK(z.loss_and_gradient(b, nullptr) == doctest::Approx(std::log(c.vocab)).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central finite differences") {
  const Corpus corpus = corpus_from_text(repeated_text(4));
  TinyLMConfig c = small_model(corpus.vocab.size());
  c.output_init_scale = 1.0;
  TinyLM m(c, 9, kernels::scalar_kernels());
  global_magnitude_prune(m, m.prunable_count() * 3 / 4);
  const Batch b = fixed_batch(corpus, c.context, 8, 2);
  std::vector<double> g;
  m.loss_and_gradient(b, &g);
  REQUIRE(g.size() == m.params().size());
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t i = 0; i < m.params().size(); i += 7) {
    if (i < m.mask().size() && !m.mask()[i]) {
      CHECK(g[i] == 0.0);
      continue;
    }
    const double x = m.params()[i];
    m.params()[i] = x + h;
    const double up = m.loss_and_gradient(b, nullptr);
    m.params()[i] = x - h;
    const double dn = m.loss_and_gradient(b, nullptr);
    m.params()[i] = x;
    worst = std::max(worst, std::fabs((up - dn) / (2 * h) - g[i]));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("gradient agrees across kernel tables") {
  const Corpus corpus = corpus_from_text(repeated_text(4));
  const TinyLMConfig c = small_model(corpus.vocab.size());
  const Batch b = fixed_batch(corpus, c.context, 32, 4);
  std::vector<double> ref;
  TinyLM(c, 1, kernels::scalar_kernels()).loss_and_gradient(b, &ref);
  for (const kernels::KernelTable* kt : kernels::available_kernels()) {
    std::vector<double> g;
    TinyLM(c, 1, *kt).loss_and_gradient(b, &g);
    for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(g[i] == doctest::Approx(ref[i]).epsilon(1e-9).scale(1e-12));
  }
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  const Corpus corpus = corpus_from_text(repeated_text(4));
  TinyLM m(small_model(corpus.vocab.size()), 2);
  const std::vector<double> before(m.params().begin(), m.params().end());
  std::vector<double> g;
  m.loss_and_gradient(fixed_batch(corpus, 3, 16, 1), &g);
  for (OptimizerKind kind : {OptimizerKind::kSgd, OptimizerKind::kAdam}) {
    OptimizerConfig oc;
    oc.kind = kind;
    oc.learning_rate = 0.0;
    Optimizer opt(oc, m.params().size(), m.mask().size(), 10);
    opt.step(m.kernels(), m.params(), g, m.mask(), 0);
    CHECK(std::equal(before.begin(), before.end(), m.params().begin()));
  }
}

TEST_CASE("learning-rate schedule") {
  OptimizerConfig oc;
  oc.learning_rate = 1.0;
  oc.schedule = LrSchedule::kWarmupCosine;
  oc.warmup_steps = 10;
  oc.min_lr_fraction = 0.1;
  Optimizer opt(oc, 4, 2, 110);
  CHECK(opt.learning_rate_at(0) == doctest::Approx(0.1));
  CHECK(opt.learning_rate_at(9) == doctest::Approx(1.0));
  CHECK(opt.learning_rate_at(60) == doctest::Approx(0.55).epsilon(0.02));
  CHECK(opt.learning_rate_at(109) == doctest::Approx(0.1).epsilon(0.01));
  CHECK(optimizer_from_string(to_string(OptimizerKind::kAdam)) == OptimizerKind::kAdam);
  CHECK(lr_schedule_from_string(to_string(LrSchedule::kWarmupCosine)) == LrSchedule::kWarmupCosine);
  CHECK_THROWS_AS(optimizer_from_string("lion"), ConfigError);
}

TEST_CASE("Adam never revives pruned weights") {
  OptimizerConfig oc;
  oc.kind = OptimizerKind::kAdam;
  oc.learning_rate = 0.1;
  std::vector<double> w{1.0, 1.0, 1.0};
  std::vector<std::uint8_t> mask{1, 1};
  std::vector<double> g{1.0, 1.0, 1.0};
  Optimizer opt(oc, 3, 2, 10);
  opt.step(kernels::scalar_kernels(), w, g, mask, 0);
  mask[1] = 0;
  w[1] = 0.0;
  opt.on_prune(mask);
  std::vector<double> g2{1.0, 0.0, 1.0};
  opt.step(kernels::scalar_kernels(), w, g2, mask, 1);
  CHECK(w[1] == 0.0);
  CHECK(w[0] < 0.9);
  CHECK(w[2] < 0.9);
}

TEST_CASE("corpus split is disjoint and complete") {
  const std::string text = repeated_text(3);
  const Corpus c = corpus_from_text(text, 0.1);
  CHECK(c.train.size() + c.held_out.size() == text.size());
  CHECK(c.held_out.size() == doctest::Approx(text.size() * 0.1).epsilon(0.02));
  std::string round;
  for (int t : c.train) round += c.vocab.decode(t);
  for (int t : c.held_out) round += c.vocab.decode(t);
  CHECK(round == text);
  CHECK(std::is_sorted(c.vocab.symbols().begin(), c.vocab.symbols().end()));
  CHECK_THROWS_AS(c.vocab.encode('\x01'), ConfigError);
}

TEST_CASE("bundled corpus loads") {
  const Corpus c = load_corpus(SPARSESCALE_CORPUS);
  CHECK(c.vocab.size() == 75);
  CHECK(c.train.size() > 200000);
}

TEST_CASE("checkpoint round trip is exact") {
  const Corpus corpus = corpus_from_text(repeated_text(4));
  TinyLM m(small_model(corpus.vocab.size()), 8);
  global_magnitude_prune(m, m.prunable_count() / 2);
  std::stringstream ss;
  save_checkpoint(ss, m);
  const TinyLM r = load_checkpoint(ss);
  CHECK(std::equal(m.params().begin(), m.params().end(), r.params().begin(), r.params().end()));
  CHECK(std::equal(m.mask().begin(), m.mask().end(), r.mask().begin(), r.mask().end()));
  CHECK(r.config().hidden == m.config().hidden);

  std::string bytes = ss.str();
  std::stringstream bad_magic("XXXX" + bytes.substr(4));
  CHECK_THROWS_AS(load_checkpoint(bad_magic), SchemaError);
  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_checkpoint(truncated), SchemaError);
}

TEST_CASE("evaluation is deterministic") {
  const Corpus corpus = corpus_from_text(repeated_text(4));
  TinyLM m(small_model(corpus.vocab.size()), 8);
  CHECK(eval_loss(m, corpus.held_out) == eval_loss(m, corpus.held_out));
  CHECK(eval_loss(m, corpus.held_out, 50) == eval_loss(m, corpus.held_out, 50));
  std::vector<int> tiny{1, 2};
  CHECK_THROWS_AS(eval_loss(m, tiny), IllPosedError);
}

TEST_CASE("sparse run follows the schedule exactly") {
  const Corpus corpus = corpus_from_text(repeated_text(40));
  const TrainConfig cfg = small_run(corpus, 0.8);
  const SparsityScheduleConfig sched = resolved_schedule(cfg);
  const ParamTrajectory plan = build_schedule(sched);

  std::vector<std::uint8_t> prev;
  Count events = 0;
  double leakage = 0.0;
  bool monotone = true;
  bool on_target = true;
  const auto on_step = [&](const StepEvent& ev) {
    const TinyLM& m = *ev.model;
    if (std::llabs(m.active_prunable() - ev.target_prunable) > 1) on_target = false;
    if (!prev.empty())
      for (std::size_t i = 0; i < prev.size(); ++i)
        if (!prev[i] && m.mask()[i]) monotone = false;
    prev.assign(m.mask().begin(), m.mask().end());
    leakage += m.kernels().masked_abs_sum(m.params().data(), m.mask().data(), m.mask().size());
    if (ev.pruned) ++events;
  };
  const TrainResult r = run_sparse_pretraining(cfg, corpus, on_step);

  CHECK(on_target);
  CHECK(monotone);
  CHECK(leakage == 0.0);
  CHECK(events == r.pruning_events);
  CHECK(r.pruning_events == static_cast<Count>(plan.segments.size()) - 2);
  REQUIRE(r.executed.segments.size() == plan.segments.size());
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    CHECK(r.executed.segments[i].tokens == plan.segments[i].tokens);
    CHECK(std::llabs(r.executed.segments[i].prunable_active - plan.segments[i].prunable_active) <= 1);
  }
  CHECK(r.record.avg_params == doctest::Approx(average_params(plan)).epsilon(1e-6));
  CHECK(r.record.sparsity == 0.8);
  CHECK(std::llabs(static_cast<Count>(r.record.final_nonzero_params) -
                   std::llround(0.2 * static_cast<double>(sched.shape.prunable))) <= 1);
  CHECK(r.final_eval_loss < std::log(corpus.vocab.size()));
  REQUIRE(!r.curve.empty());
  CHECK(r.curve.back().compute == doctest::Approx(effective_compute(r.executed)));
}

TEST_CASE("runs are bit-identical for a fixed seed") {
  const Corpus corpus = corpus_from_text(repeated_text(20));
  TrainConfig cfg = small_run(corpus, 0.5, 3);
  cfg.schedule.total_compute /= 4;
  TinyLM a(cfg.model, 0), b(cfg.model, 0);
  const TrainResult ra = run_sparse_pretraining(cfg, corpus, {}, &a);
  const TrainResult rb = run_sparse_pretraining(cfg, corpus, {}, &b);
  CHECK(ra.final_eval_loss == rb.final_eval_loss);
  CHECK(std::equal(a.params().begin(), a.params().end(), b.params().begin(), b.params().end()));
  cfg.seed = 4;
  const TrainResult rc = run_sparse_pretraining(cfg, corpus);
  CHECK(rc.final_eval_loss != ra.final_eval_loss);
}

TEST_CASE("dense run never prunes") {
  const Corpus corpus = corpus_from_text(repeated_text(20));
  TrainConfig cfg = small_run(corpus, 0.0);
  cfg.schedule.total_compute /= 4;
  bool pruned = false;
  const TrainResult r = run_sparse_pretraining(
      cfg, corpus, [&](const StepEvent& ev) { pruned |= ev.pruned || ev.model->active_prunable() != ev.model->prunable_count(); });
  CHECK_FALSE(pruned);
  CHECK(r.pruning_events == 0);
  CHECK(r.executed.segments.size() == 1);
}

TEST_CASE("matched dense configuration") {
  TinyLMConfig base;
  const Count target = TinyLM::shape_of(base).prunable / 2;
  const TinyLMConfig d = match_dense_model(base, target);
  const Count got = TinyLM::shape_of(d).prunable;
  TinyLMConfig up = d, dn = d;
  ++up.hidden;
  --dn.hidden;
  CHECK(std::llabs(got - target) <= std::llabs(TinyLM::shape_of(up).prunable - target));
  CHECK(std::llabs(got - target) <= std::llabs(TinyLM::shape_of(dn).prunable - target));

  const Corpus corpus = corpus_from_text(repeated_text(20));
  TrainConfig cfg = small_run(corpus, 0.75);
  cfg.schedule.total_compute /= 4;
  const TrainResult sparse = run_sparse_pretraining(cfg, corpus);
  const TrainConfig dense = matched_dense_config(cfg, sparse);
  CHECK(dense.schedule.target_sparsity == 0.0);
  CHECK(dense.schedule.total_compute == doctest::Approx(effective_compute(sparse.executed)));
  const TrainResult dr = run_sparse_pretraining(dense, corpus);
  CHECK(effective_compute(dr.executed) ==
        doctest::Approx(effective_compute(sparse.executed)).epsilon(0.02));
}

TEST_CASE("200-weight model keeping 77 matches the full-sort oracle") {
  std::mt19937_64 rng(200);
  std::normal_distribution<double> nd;
  std::vector<double> w(200);
  for (double& x : w) x = nd(rng);
  std::vector<std::uint8_t> m(200, 1);
  std::vector<int> idx(200);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::fabs(w[a]) != std::fabs(w[b]) ? std::fabs(w[a]) > std::fabs(w[b]) : a < b;
  });
  magnitude_prune(w, m, 77);
  std::vector<int> kept;
  for (int i = 0; i < 200; ++i)
    if (m[i]) kept.push_back(i);
  std::vector<int> expect(idx.begin(), idx.begin() + 77);
  std::sort(expect.begin(), expect.end());
  CHECK(kept == expect);
}

TEST_CASE("held-out loss falls during training on the bundled corpus") {
  const Corpus corpus = load_corpus(SPARSESCALE_CORPUS);
  TrainConfig cfg;
  cfg.model.vocab = corpus.vocab.size();
  cfg.batch_size = 32;
  cfg.log_every = 25;
  cfg.eval_examples = 1024;
  cfg.schedule.target_sparsity = 0.5;
  cfg.schedule.steps_per_iteration = 10;
  cfg.schedule.accounting = Accounting::kPrunableOnly;
  cfg.schedule.total_compute = 6.0 * static_cast<double>(TinyLM::shape_of(cfg.model).prunable) * 32 * 300;
  const TrainResult r = run_sparse_pretraining(cfg, corpus);
  REQUIRE(r.curve.size() >= 2);
  CHECK(r.curve.back().eval_loss < r.curve.front().eval_loss);
  CHECK(r.final_eval_loss < 0.85 * std::log(corpus.vocab.size()));
}
