#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>

#include <json.hpp>

#include "sparsescale/cli/grid.hpp"
#include "sparsescale/cli/report.hpp"
#include "sparsescale/cli/runners.hpp"
#include "sparsescale/cli/store.hpp"
#include "sparsescale/cli/sweep.hpp"
#include "sparsescale/cli/table.hpp"
#include "sparsescale/core/errors.hpp"
#include "sparsescale/core/schedule.hpp"
#include "sparsescale/core/trajectory_io.hpp"
#include "sparsescale/lawfit/dataset.hpp"
#include "sparsescale/lawfit/fit.hpp"
#include "sparsescale/prescribe/prescribe.hpp"
#include "sparsescale/theorysim/theory.hpp"
#include "sparsescale/trainer/checkpoint.hpp"
#include "sparsescale/trainer/corpus.hpp"
#include "sparsescale/trainer/train.hpp"

#ifndef SPARSESCALE_CORPUS
#define SPARSESCALE_CORPUS "data/corpus.txt"
#endif

namespace sparsescale::tool {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- key tables -----------------------------------------------------------

const std::vector<KeySpec> kScheduleKeys = {
    {"prunable_params", "prunable parameters of the dense model"},
    {"nonprunable_params", "nonprunable parameters (embeddings, norms)"},
    {"target_sparsity", "final sparsity S of the prunable weights, in [0, 1)"},
    {"dense_fraction", "share of total compute in the dense phase"},
    {"prune_fraction", "share of total compute in the pruning phase"},
    {"steps_per_iteration", "optimizer steps per pruning iteration (P)"},
    {"tokens_per_step", "tokens per optimizer step"},
    {"total_compute", "total effective compute budget in FLOPs"},
    {"accounting", "parameter accounting: all | prunable"},
};

const std::vector<KeySpec> kTheoryKeys = {
    {"theory_A", "scale A of the theoretical law L(C) = (A/C)^alpha"},
    {"theory_alpha", "exponent alpha of the theoretical law"},
    {"burn_in_fraction", "share of trajectory compute skipped as burn-in"},
    {"initial_compute", "compute spent before the trajectory starts (FLOPs)"},
    {"max_increment_fraction", "largest integration step as a share of trajectory compute"},
};

const std::vector<KeySpec> kModelKeys = {
    {"corpus", "training text file (character level)"},
    {"held_out_fraction", "share of the corpus held out for evaluation"},
    {"context", "characters of left context"},
    {"embed", "embedding width per context character"},
    {"hidden", "width of both hidden layers"},
    {"output_init_scale", "output-layer init scale relative to Glorot"},
    {"batch_size", "examples (predicted tokens) per step"},
    {"learning_rate", "peak learning rate"},
    {"optimizer", "sgd | adam"},
    {"lr_schedule", "constant | warmup_cosine"},
    {"warmup_steps", "linear warmup steps (warmup_cosine)"},
    {"min_lr_fraction", "cosine floor as a share of the learning rate"},
    {"beta1", "Adam first-moment decay"},
    {"beta2", "Adam second-moment decay"},
    {"adam_eps", "Adam epsilon"},
    {"log_every", "steps between curve points"},
    {"eval_examples", "held-out examples per curve point (0 = all)"},
};

const std::vector<KeySpec> kBudgetKeys = {
    {"duration", "budget as a multiple of tokens_per_param tokens per initial parameter "
                 "(used when total_compute is not given)"},
    {"tokens_per_param", "compute-optimal tokens per parameter behind 'duration'"},
};

std::vector<KeySpec> concat(std::initializer_list<const std::vector<KeySpec>*> parts,
                            std::vector<KeySpec> extra = {}) {
  std::vector<KeySpec> out;
  for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

// ---- helpers --------------------------------------------------------------

bool get_bool(const KeyValueConfig& kv, const std::string& key, bool fallback) {
  const auto v = kv.get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + *v + "'");
}

std::string require_string(const KeyValueConfig& kv, const std::string& key) {
  const auto v = kv.get(key);
  if (!v || v->empty()) throw ConfigError("missing required option --" + [&] {
    std::string s = key;
    for (char& c : s)
      if (c == '_') c = '-';
    return s;
  }());
  return *v;
}

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json schedule_json(const SparsityScheduleConfig& cfg) {
  return {{"prunable_params", cfg.shape.prunable},
          {"nonprunable_params", cfg.shape.nonprunable},
          {"target_sparsity", cfg.target_sparsity},
          {"dense_fraction", cfg.dense_fraction},
          {"prune_fraction", cfg.prune_fraction},
          {"steps_per_iteration", cfg.steps_per_iteration},
          {"tokens_per_step", cfg.tokens_per_step},
          {"total_compute", cfg.total_compute},
          {"accounting", std::string(to_string(cfg.accounting))}};
}

json trajectory_stats(const SparsityScheduleConfig& cfg, const ParamTrajectory& t) {
  json j;
  if (cfg.target_sparsity > 0.0) {
    const IterationPlan plan = solve_iterations(cfg);
    j["pruning_iterations"] = plan.iterations;
    j["removal_fraction"] = plan.removal_fraction;
  } else {
    j["pruning_iterations"] = 0;
    j["removal_fraction"] = 0.0;
  }
  j["segments"] = t.segments.size();
  j["total_tokens"] = t.total_tokens();
  j["initial_active"] = t.initial_active();
  j["final_active"] = t.final_active();
  j["avg_params"] = average_params(t);
  j["avg_over_initial"] = average_params(t) / static_cast<double>(t.initial_active());
  j["compression_rate"] = compression_rate(t);
  j["effective_compute"] = effective_compute(t);
  const ModelShape dense = match_dense(t);
  j["matched_dense_params"] = dense.total();
  return j;
}

// Applies duration/tokens_per_param when no explicit budget was given.
void apply_budget(const KeyValueConfig& kv, SparsityScheduleConfig& cfg, double default_duration) {
  if (kv.contains("total_compute")) return;
  const double duration = kv.get_double("duration", default_duration);
  const double tpp = kv.get_double("tokens_per_param", 20.0);
  const double n0 = static_cast<double>(active_params_for(cfg, cfg.shape.prunable));
  cfg.total_compute = 6.0 * n0 * duration * tpp * n0;
}

theorysim::TheoryParams theory_params(const KeyValueConfig& kv) {
  theorysim::TheoryParams p;
  p.A = kv.get_double("theory_A", 4.8e21);
  p.alpha = kv.get_double("theory_alpha", 0.203);
  p.validate();
  return p;
}

theorysim::SimulationOptions simulation_options(const KeyValueConfig& kv) {
  theorysim::SimulationOptions o;
  o.burn_in_fraction = kv.get_double("burn_in_fraction", o.burn_in_fraction);
  o.initial_compute = kv.get_double("initial_compute", o.initial_compute);
  o.max_increment_fraction = kv.get_double("max_increment_fraction", o.max_increment_fraction);
  return o;
}

trainer::TrainConfig train_config(const Context& ctx) {
  const KeyValueConfig& kv = ctx.kv;
  trainer::TrainConfig cfg;
  cfg.model.context = static_cast<int>(kv.get_count("context", cfg.model.context));
  cfg.model.embed = static_cast<int>(kv.get_count("embed", cfg.model.embed));
  cfg.model.hidden = static_cast<int>(kv.get_count("hidden", cfg.model.hidden));
  cfg.model.output_init_scale = kv.get_double("output_init_scale", cfg.model.output_init_scale);
  cfg.batch_size = kv.get_count("batch_size", cfg.batch_size);
  cfg.optimizer.learning_rate = kv.get_double("learning_rate", cfg.optimizer.learning_rate);
  if (const auto o = kv.get("optimizer")) cfg.optimizer.kind = trainer::optimizer_from_string(*o);
  if (const auto s = kv.get("lr_schedule")) cfg.optimizer.schedule = trainer::lr_schedule_from_string(*s);
  cfg.optimizer.warmup_steps = kv.get_count("warmup_steps", cfg.optimizer.warmup_steps);
  cfg.optimizer.min_lr_fraction = kv.get_double("min_lr_fraction", cfg.optimizer.min_lr_fraction);
  cfg.optimizer.beta1 = kv.get_double("beta1", cfg.optimizer.beta1);
  cfg.optimizer.beta2 = kv.get_double("beta2", cfg.optimizer.beta2);
  cfg.optimizer.eps = kv.get_double("adam_eps", cfg.optimizer.eps);
  cfg.log_every = kv.get_count("log_every", cfg.log_every);
  cfg.eval_examples = static_cast<std::size_t>(kv.get_count("eval_examples", 2048));
  cfg.seed = ctx.seed;
  cfg.label = kv.get_string("label", "");
  // Schedule: canonical allocation by default; shape and step size come from the model.
  SparsityScheduleConfig base = canonical_schedule();
  base.shape = {};
  base.total_compute = 0.0;
  cfg.schedule = schedule_from_config(kv, base);
  return cfg;
}

std::shared_ptr<const trainer::Corpus> load_corpus(const KeyValueConfig& kv) {
  const std::string path = kv.get_string("corpus", SPARSESCALE_CORPUS);
  return std::make_shared<trainer::Corpus>(
      trainer::load_corpus(path, kv.get_double("held_out_fraction", 0.1)));
}

lawfit::ScalingLawFit law_from_fit_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read fit file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("fit file " + path.string() + ": " + e.what());
  }
  if (!j.contains("parameters")) throw SchemaError("fit file is missing field 'parameters'");
  const json& p = j["parameters"];
  lawfit::ScalingLawFit f;
  for (const char* k : {"A", "B", "E", "alpha", "beta"})
    if (!p.contains(k)) throw SchemaError(std::string("fit file is missing parameter '") + k + "'");
  f.A = p["A"].get<double>();
  f.B = p["B"].get<double>();
  f.E = p["E"].get<double>();
  f.alpha = p["alpha"].get<double>();
  f.beta = p["beta"].get<double>();
  return f;
}

void print_summary(std::ostream& out, const cli::ReportOutput& r) {
  for (const std::string& s : r.summary) out << s << '\n';
  out << "wrote " << r.csv.string() << " and " << r.svg.string() << '\n';
}

}  // namespace

// ---- key registry -----------------------------------------------------------

std::vector<KeySpec> keys_for(const std::string& command) {
  if (command == "schedule")
    return concat({&kScheduleKeys, &kBudgetKeys});
  if (command == "fit")
    return {{"data", "dataset file (.csv or line-delimited JSON records)"},
            {"starts", "number of multi-start initializations"},
            {"max_iterations", "L-BFGS iteration cap per start"}};
  if (command == "fit-frantar")
    return {{"data", "dataset file (.csv or line-delimited JSON records)"},
            {"starts", "number of multi-start initializations"},
            {"max_iterations", "L-BFGS iteration cap per start"},
            {"allow_single_sparsity", "accept data with one sparsity level", true}};
  if (command == "prescribe")
    return {{"constants", "law constants when no fit is given: rounded | unrounded"},
            {"fit", "fit.json produced by the fit command"},
            {"law_A", "override A"},
            {"law_B", "override B"},
            {"law_E", "override E"},
            {"law_alpha", "override alpha"},
            {"law_beta", "override beta"},
            {"target_loss", "loss to reach"},
            {"inference_tokens", "tokens served over the model's lifetime"},
            {"target_sparsity", "sparsity of the sparse prescription"},
            {"compression", "average-to-final parameter ratio r (default: the canonical "
                            "schedule's rate at the given sparsity)"}};
  if (command == "simulate")
    return concat({&kScheduleKeys, &kTheoryKeys, &kBudgetKeys},
                  {{"compare_dense", "also simulate the equal-compute dense counterpart", true}});
  if (command == "train") {
    std::vector<KeySpec> sched;
    for (const KeySpec& k : kScheduleKeys)
      if (k.name != "prunable_params" && k.name != "nonprunable_params" &&
          k.name != "tokens_per_step")
        sched.push_back(k);
    return concat({&sched, &kModelKeys, &kBudgetKeys},
                  {{"label", "label stored in the run record"},
                   {"checkpoint", "write the final model to this file"},
                   {"compare_dense", "also train the equal-compute dense counterpart", true}});
  }
  if (command == "sweep") {
    std::vector<KeySpec> sched;
    for (const KeySpec& k : kScheduleKeys)
      if (k.name != "target_sparsity" && k.name != "dense_fraction" &&
          k.name != "prune_fraction" && k.name != "total_compute")
        sched.push_back(k);
    return concat({&sched, &kTheoryKeys, &kModelKeys},
                  {{"runner", "theorysim | trainer"},
                   {"grid", "schedule (80 configurations) | lr_batch (9)"},
                   {"dense_fractions", "comma-separated dense-phase shares"},
                   {"prune_fractions", "comma-separated pruning-phase shares"},
                   {"sparsities", "comma-separated target sparsities"},
                   {"durations", "comma-separated budgets (multiples of compute-optimal tokens)"},
                   {"learning_rates", "comma-separated learning rates"},
                   {"batch_sizes", "comma-separated batch sizes"},
                   {"tokens_per_param", "compute-optimal tokens per parameter"},
                   {"store", "results store (default <out-dir>/sweep_results.jsonl)"},
                   {"retry_failed", "re-run configurations whose stored run failed", true}});
  }
  if (command == "report")
    return {{"kind", "schedule_sweep | lr_bs_sweep | fit | prescription | trajectory"},
            {"input", "results table (.csv, or a .jsonl results store)"},
            {"stem", "output file stem (default: the kind)"}};
  return {};
}

std::vector<std::string> all_keys() {
  std::set<std::string> keys{"seed", "workers", "out_dir"};
  for (const char* c : {"schedule", "fit", "fit-frantar", "prescribe", "simulate", "train", "sweep",
                        "report"})
    for (const KeySpec& k : keys_for(c)) keys.insert(k.name);
  return {keys.begin(), keys.end()};
}

// ---- commands -----------------------------------------------------------------

int run_schedule(Context& ctx) {
  std::ostream& out = *ctx.out;
  SparsityScheduleConfig cfg = schedule_from_config(ctx.kv, canonical_schedule());
  if (ctx.kv.contains("duration") || ctx.kv.contains("tokens_per_param")) apply_budget(ctx.kv, cfg, 1.0);
  const ParamTrajectory t = build_schedule(cfg);
  json j{{"schedule", schedule_json(cfg)}, {"trajectory", trajectory_stats(cfg, t)}};
  fs::create_directories(ctx.out_dir);
  {
    std::ofstream csv(ctx.out_dir / "schedule_trajectory.csv");
    write_trajectory_csv(csv, t);
  }
  write_json(ctx.out_dir / "schedule_stats.json", j);
  const json& s = j["trajectory"];
  out << "pruning iterations " << s["pruning_iterations"].get<Count>() << ", removal fraction "
      << sci(s["removal_fraction"].get<double>()) << " per iteration\n";
  out << "avg params " << sci(s["avg_params"].get<double>()) << " ("
      << sci(s["avg_over_initial"].get<double>()) << " of initial), final active "
      << s["final_active"].get<Count>() << ", compression rate "
      << sci(s["compression_rate"].get<double>()) << '\n';
  out << "tokens " << sci(static_cast<double>(s["total_tokens"].get<Count>()))
      << ", effective compute " << sci(s["effective_compute"].get<double>())
      << ", matched dense size " << s["matched_dense_params"].get<Count>() << '\n';
  out << "wrote " << (ctx.out_dir / "schedule_trajectory.csv").string() << " and "
      << (ctx.out_dir / "schedule_stats.json").string() << '\n';
  return 0;
}

int run_fit(Context& ctx) {
  const auto data = lawfit::load_dataset(require_string(ctx.kv, "data"));
  lawfit::FitOptions opt;
  opt.starts = static_cast<int>(ctx.kv.get_count("starts", opt.starts));
  opt.max_iterations = static_cast<int>(ctx.kv.get_count("max_iterations", opt.max_iterations));
  opt.seed = ctx.seed;
  opt.workers = ctx.workers;
  const lawfit::ScalingLawFit f = lawfit::fit(data, opt);
  write_json(ctx.out_dir / "fit.json", lawfit::fit_report(f, data));
  std::ostream& out = *ctx.out;
  out << "A=" << sci(f.A) << " B=" << sci(f.B) << " E=" << sci(f.E) << " alpha=" << sci(f.alpha)
      << " beta=" << sci(f.beta) << " (objective " << sci(f.objective_value) << ", "
      << f.n_starts_converged << "/" << f.n_starts << " starts converged)\n";
  print_summary(out, cli::write_report(cli::fit_table(data, f), cli::ReportKind::kFit, ctx.out_dir, "fit"));
  return 0;
}

int run_fit_frantar(Context& ctx) {
  const auto data = lawfit::load_dataset(require_string(ctx.kv, "data"));
  lawfit::FrantarFitOptions opt;
  opt.starts = static_cast<int>(ctx.kv.get_count("starts", opt.starts));
  opt.max_iterations = static_cast<int>(ctx.kv.get_count("max_iterations", opt.max_iterations));
  opt.seed = ctx.seed;
  opt.workers = ctx.workers;
  opt.allow_single_sparsity = get_bool(ctx.kv, "allow_single_sparsity", false);
  const lawfit::FrantarLawFit f = lawfit::fit_frantar(data, opt);
  write_json(ctx.out_dir / "fit_frantar.json", lawfit::fit_report(f, data));
  std::ostream& out = *ctx.out;
  out << "a_S=" << sci(f.a_S) << " b_S=" << sci(f.b_S) << " c_S=" << sci(f.c_S)
      << " b_N=" << sci(f.b_N) << " a_D=" << sci(f.a_D) << " b_D=" << sci(f.b_D)
      << " c=" << sci(f.c) << " (objective " << sci(f.objective_value) << ")\n";
  print_summary(out, cli::write_report(cli::fit_table(data, f), cli::ReportKind::kFit, ctx.out_dir,
                                       "fit_frantar"));
  return 0;
}

int run_prescribe(Context& ctx) {
  const KeyValueConfig& kv = ctx.kv;
  lawfit::ScalingLawFit law;
  if (const auto f = kv.get("fit")) {
    law = law_from_fit_json(*f);
  } else {
    const std::string c = kv.get_string("constants", "rounded");
    if (c == "rounded")
      law = lawfit::chinchilla_rounded();
    else if (c == "unrounded")
      law = lawfit::chinchilla_unrounded();
    else
      throw ConfigError("constants must be 'rounded' or 'unrounded', got '" + c + "'");
  }
  law.A = kv.get_double("law_A", law.A);
  law.B = kv.get_double("law_B", law.B);
  law.E = kv.get_double("law_E", law.E);
  law.alpha = kv.get_double("law_alpha", law.alpha);
  law.beta = kv.get_double("law_beta", law.beta);
  const double target = kv.get_double("target_loss", 1.89);
  const double tinf = kv.get_double("inference_tokens", 100e12);
  const double sparsity = kv.get_double("target_sparsity", 0.8);
  const double r = kv.contains("compression")
                       ? kv.get_double("compression", 2.0)
                       : prescribe::schedule_compression(canonical_schedule(), sparsity);

  const prescribe::Prescription chin = prescribe::solve_chinchilla(law, target, tinf);
  const prescribe::LifetimeComparison cmp = prescribe::compare_lifetime(law, target, tinf, sparsity, r);
  std::ostream& out = *ctx.out;
  const auto line = [&](const char* name, const prescribe::Prescription& p) {
    out << name << ": avg params " << sci(p.avg_params) << ", final params " << sci(p.final_params)
        << ", tokens " << sci(p.tokens) << ", lifetime FLOPs " << sci(p.lifetime_flops) << '\n';
  };
  out << "law A=" << law.A << " B=" << law.B << " E=" << law.E << " alpha=" << law.alpha
      << " beta=" << law.beta << ", target loss " << target << ", inference tokens " << sci(tinf)
      << '\n';
  line("training-optimal (dense)", chin);
  line("lifetime-optimal dense", cmp.dense);
  line(("lifetime-optimal sparse (S=" + sci(sparsity) + ", r=" + sci(r) + ")").c_str(), cmp.sparse);
  out << "sparse lifetime saving vs dense lifetime optimum: " << sci(100.0 * cmp.saving) << "%\n";
  const cli::Table t = cli::prescription_table(
      {{"training_optimal", chin}, {"lifetime_dense", cmp.dense}, {"lifetime_sparse", cmp.sparse}});
  json j{{"law", {{"A", law.A}, {"B", law.B}, {"E", law.E}, {"alpha", law.alpha}, {"beta", law.beta}}},
         {"target_loss", target},
         {"inference_tokens", tinf},
         {"saving", cmp.saving}};
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    json row;
    for (std::size_t c = 0; c < t.columns.size(); ++c)
      row[t.columns[c]] = c == 0 ? json(t.rows[i][c]) : json(t.number(i, t.columns[c]));
    j["prescriptions"].push_back(row);
  }
  write_json(ctx.out_dir / "prescription.json", j);
  print_summary(out, cli::write_report(t, cli::ReportKind::kPrescription, ctx.out_dir, "prescription"));
  return 0;
}

int run_simulate(Context& ctx) {
  SparsityScheduleConfig cfg = schedule_from_config(ctx.kv, canonical_schedule());
  if (ctx.kv.contains("duration") || ctx.kv.contains("tokens_per_param")) apply_budget(ctx.kv, cfg, 1.0);
  const theorysim::TheoryParams p = theory_params(ctx.kv);
  const theorysim::SimulationOptions opt = simulation_options(ctx.kv);
  const ParamTrajectory t = build_schedule(cfg);
  const theorysim::SimulationResult sim = theorysim::simulate_trajectory(p, t, opt);
  std::ostream& out = *ctx.out;
  cli::Table table = cli::curve_table(sim.curve, "sparse S=" + sci(cfg.target_sparsity));
  json j{{"schedule", schedule_json(cfg)},
         {"theory", {{"A", p.A}, {"alpha", p.alpha}}},
         {"final_loss", sim.curve.back().loss},
         {"total_delta_loss", sim.total_delta_loss},
         {"avg_params", average_params(t)},
         {"effective_compute", effective_compute(t)}};
  out << "final loss " << sim.curve.back().loss << " (total change " << sim.total_delta_loss
      << ") at effective compute " << sci(effective_compute(t)) << '\n';
  if (get_bool(ctx.kv, "compare_dense", false) && cfg.target_sparsity > 0.0) {
    const ModelShape dense_shape = match_dense(t);
    const ParamTrajectory dense = ParamTrajectory::from_pairs(
        {{dense_shape.total(), t.total_tokens()}});
    const theorysim::SimulationResult dsim = theorysim::simulate_trajectory(p, dense, opt);
    cli::append_rows(table, cli::curve_table(dsim.curve, "matched dense"));
    j["matched_dense"] = {{"params", dense_shape.total()},
                          {"final_loss", dsim.curve.back().loss},
                          {"effective_compute", effective_compute(dense)}};
    out << "matched dense (" << dense_shape.total() << " params): final loss "
        << dsim.curve.back().loss << '\n';
  }
  write_json(ctx.out_dir / "simulation.json", j);
  print_summary(out, cli::write_report(table, cli::ReportKind::kTrajectory, ctx.out_dir, "simulation"));
  return 0;
}

int run_train(Context& ctx) {
  const auto corpus = load_corpus(ctx.kv);
  trainer::TrainConfig cfg = train_config(ctx);
  cfg.model.vocab = corpus->vocab.size();
  {
    SparsityScheduleConfig s = trainer::resolved_schedule(cfg);
    apply_budget(ctx.kv, s, 1.0);
    cfg.schedule.total_compute = s.total_compute;
  }
  std::ostream& out = *ctx.out;
  trainer::TinyLM model(cfg.model, cfg.seed);
  const trainer::TrainResult r = trainer::run_sparse_pretraining(cfg, *corpus, {}, &model);
  if (cfg.label.empty()) cfg.label = "tinylm_S" + sci(cfg.schedule.target_sparsity);
  RunRecord rec = r.record;
  rec.label = cfg.label;
  std::vector<RunRecord> records{rec};
  cli::Table table = cli::curve_table(r.curve, rec.label);
  out << rec.label << ": " << r.pruning_events << " pruning events, avg params "
      << sci(rec.avg_params) << ", tokens " << sci(rec.total_tokens) << ", final held-out loss "
      << rec.final_loss << '\n';
  if (const auto ck = ctx.kv.get("checkpoint")) {
    const fs::path ck_path(*ck);
    if (ck_path.has_parent_path()) fs::create_directories(ck_path.parent_path());
    trainer::save_checkpoint(ck_path, model);
    out << "wrote checkpoint " << *ck << '\n';
  }
  if (get_bool(ctx.kv, "compare_dense", false) && cfg.schedule.target_sparsity > 0.0) {
    trainer::TrainConfig dense = trainer::matched_dense_config(cfg, r);
    const trainer::TrainResult d = trainer::run_sparse_pretraining(dense, *corpus);
    RunRecord drec = d.record;
    drec.label = dense.label;
    records.push_back(drec);
    cli::append_rows(table, cli::curve_table(d.curve, drec.label));
    const double rel = (rec.final_loss - drec.final_loss) / drec.final_loss;
    out << drec.label << " (hidden " << dense.model.hidden << ", " << sci(drec.avg_params)
        << " params): final held-out loss " << drec.final_loss << "; sparse vs dense "
        << sci(100.0 * rel) << "%\n";
  }
  fs::create_directories(ctx.out_dir);
  {
    std::ofstream rec_out(ctx.out_dir / "records.jsonl", std::ios::app);
    lawfit::write_dataset_jsonl(rec_out, records);
  }
  out << "appended " << records.size() << " record(s) to " << (ctx.out_dir / "records.jsonl").string()
      << '\n';
  print_summary(out, cli::write_report(table, cli::ReportKind::kTrajectory, ctx.out_dir, "train_curve"));
  return 0;
}

int run_sweep_command(Context& ctx) {
  const KeyValueConfig& kv = ctx.kv;
  const std::string grid_name = kv.get_string("grid", "schedule");
  cli::SweepGrid grid;
  if (grid_name == "schedule")
    grid = cli::schedule_grid();
  else if (grid_name == "lr_batch")
    grid = cli::lr_batch_grid();
  else
    throw ConfigError("grid must be 'schedule' or 'lr_batch', got '" + grid_name + "'");
  if (const auto v = kv.get("dense_fractions")) grid.dense_fractions = cli::parse_number_list(*v);
  if (const auto v = kv.get("prune_fractions")) grid.prune_fractions = cli::parse_number_list(*v);
  if (const auto v = kv.get("sparsities")) grid.sparsities = cli::parse_number_list(*v);
  if (const auto v = kv.get("durations")) grid.durations = cli::parse_number_list(*v);
  if (const auto v = kv.get("learning_rates")) grid.learning_rates = cli::parse_number_list(*v);
  if (const auto v = kv.get("batch_sizes")) {
    grid.batch_sizes.clear();
    for (double b : cli::parse_number_list(*v)) {
      if (b < 1 || b != std::floor(b)) throw ConfigError("batch sizes must be positive integers");
      grid.batch_sizes.push_back(static_cast<Count>(b));
    }
  }
  std::ostream& out = *ctx.out;
  std::string warning;
  const auto points = cli::enumerate_points(grid, &warning);
  if (points.empty()) {
    *ctx.err << "warning: " << warning << '\n';
    return 0;
  }
  const double tpp = kv.get_double("tokens_per_param", 20.0);
  const std::string runner_name = kv.get_string("runner", "theorysim");
  std::unique_ptr<cli::Runner> runner;
  if (runner_name == "theorysim") {
    runner = std::make_unique<cli::TheorySimRunner>(
        theory_params(kv), schedule_from_config(kv, canonical_schedule()), simulation_options(kv), tpp);
  } else if (runner_name == "trainer") {
    runner = std::make_unique<cli::TrainerRunner>(train_config(ctx), load_corpus(kv), tpp);
  } else {
    throw ConfigError("runner must be 'theorysim' or 'trainer', got '" + runner_name + "'");
  }
  cli::ResultStore store(kv.get_string("store", (ctx.out_dir / "sweep_results.jsonl").string()));
  cli::SweepOptions opt;
  opt.seed = ctx.seed;
  opt.workers = ctx.workers;
  opt.retry_failed = get_bool(kv, "retry_failed", false);
  opt.on_record = [&](const cli::SweepRecord& r, bool executed) {
    if (!executed) return;
    *ctx.err << "[" << r.index + 1 << "/" << points.size() << "] " << r.point.canonical() << ": "
             << (r.ok ? "loss " + std::to_string(r.record.final_loss) : "FAILED: " + r.error) << '\n';
  };
  out << points.size() << " configurations (" << runner->name() << " runner)\n";
  const cli::SweepSummary s = cli::run_sweep(points, *runner, store, opt);
  out << "executed " << s.executed << ", skipped " << s.skipped << " already in "
      << store.path().string() << ", failed " << s.failed << '\n';
  const cli::Table table = cli::sweep_table(s.rows);
  if (s.failed < s.rows.size()) {
    const auto kind = grid_name == "schedule" ? cli::ReportKind::kScheduleSweep
                                              : cli::ReportKind::kLrBatchSweep;
    print_summary(out, cli::write_report(table, kind, ctx.out_dir));
  } else {
    cli::write_csv(ctx.out_dir / "sweep_results.csv", table);
  }
  return s.failed > 0 ? 3 : 0;
}

int run_report(Context& ctx) {
  const cli::ReportKind kind = cli::report_kind_from_string(require_string(ctx.kv, "kind"));
  const cli::Table t = cli::load_table(require_string(ctx.kv, "input"));
  print_summary(*ctx.out, cli::write_report(t, kind, ctx.out_dir, ctx.kv.get_string("stem", "")));
  return 0;
}

}  // namespace sparsescale::tool
