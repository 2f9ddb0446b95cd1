#include "sparsescale/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "sparsescale/cli/svg.hpp"
#include "sparsescale/core/errors.hpp"

namespace sparsescale::cli {
namespace {

std::string num(double v, const char* f = "%.10g") {
  if (!std::isfinite(v)) return "";
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool row_ok(const Table& t, std::size_t i) { return !t.has("status") || t.text(i, "status") == "ok"; }

std::string group_name(double sparsity, double duration) {
  return "S=" + num(sparsity, "%g") + " x" + num(duration, "%g");
}

std::string pair_name(double d, double p) { return "(" + num(d, "%g") + ", " + num(p, "%g") + ")"; }

ReportOutput schedule_sweep(const Table& in, const std::filesystem::path& csv,
                            const std::filesystem::path& svg) {
  ReportOutput out;
  out.table = in;
  Table& t = out.table;
  t.columns.push_back("delta_vs_best");
  t.columns.push_back("best_in_group");

  using Group = std::pair<double, double>;  // (sparsity, duration)
  using Pair = std::pair<double, double>;   // (dense, prune)
  std::map<Group, std::pair<double, std::size_t>> best;  // group -> (loss, row)
  std::set<Pair> pairs;
  for (std::size_t i = 0; i < in.rows.size(); ++i) {
    pairs.insert({in.number(i, "dense_fraction"), in.number(i, "prune_fraction")});
    const double loss = in.number(i, "final_loss");
    if (!row_ok(in, i) || !std::isfinite(loss)) continue;
    const Group g{in.number(i, "sparsity"), in.number(i, "duration")};
    const auto it = best.find(g);
    if (it == best.end() || loss < it->second.first) best[g] = {loss, i};
  }
  if (best.empty()) throw SchemaError("results contain no successful rows");

  std::map<Group, std::map<Pair, double>> delta;
  for (std::size_t i = 0; i < in.rows.size(); ++i) {
    const Group g{in.number(i, "sparsity"), in.number(i, "duration")};
    const double loss = in.number(i, "final_loss");
    const auto it = best.find(g);
    if (!row_ok(in, i) || !std::isfinite(loss) || it == best.end()) {
      t.rows[i].push_back("");
      t.rows[i].push_back("0");
      continue;
    }
    const double d = loss - it->second.first;
    delta[g][{in.number(i, "dense_fraction"), in.number(i, "prune_fraction")}] = d;
    t.rows[i].push_back(num(d));
    t.rows[i].push_back(it->second.second == i ? "1" : "0");
  }

  // Summary: overall best (lowest mean delta across groups), then per group.
  std::map<Pair, std::pair<double, int>> mean_delta;
  std::map<Pair, int> wins, near;
  for (const auto& [g, m] : delta)
    for (const auto& [p, d] : m) {
      mean_delta[p].first += d;
      ++mean_delta[p].second;
      if (d == 0.0) ++wins[p];
      if (d <= 0.01) ++near[p];
    }
  Pair top = mean_delta.begin()->first;
  double top_mean = INFINITY;
  for (const auto& [p, s] : mean_delta)
    if (s.second == static_cast<int>(delta.size()) && s.first / s.second < top_mean) {
      top = p;
      top_mean = s.first / s.second;
    }
  if (!std::isfinite(top_mean))
    for (const auto& [p, s] : mean_delta)
      if (s.first / s.second < top_mean) {
        top = p;
        top_mean = s.first / s.second;
      }
  out.summary.push_back("best allocation (f_dense, f_prune) = " + pair_name(top.first, top.second) +
                        ": optimal in " + std::to_string(wins[top]) + "/" +
                        std::to_string(delta.size()) + " groups, within 0.01 of the optimum in " +
                        std::to_string(near[top]) + "/" + std::to_string(delta.size()) +
                        ", mean loss delta vs optimum " + num(top_mean, "%.4g"));
  for (const auto& [g, b] : best) {
    const std::size_t r = b.second;
    std::string line = group_name(g.first, g.second) + ": best " +
                       pair_name(in.number(r, "dense_fraction"), in.number(r, "prune_fraction")) +
                       " loss " + num(b.first, "%.6g");
    std::vector<std::pair<double, Pair>> rest;
    for (const auto& [p, d] : delta[g])
      if (d > 0.0) rest.emplace_back(d, p);
    std::sort(rest.begin(), rest.end());
    if (!rest.empty())
      line += "; next " + pair_name(rest.front().second.first, rest.front().second.second) + " +" +
              num(rest.front().first, "%.4g") + ", worst " +
              pair_name(rest.back().second.first, rest.back().second.second) + " +" +
              num(rest.back().first, "%.4g");
    out.summary.push_back(line);
  }

  // Grouped bars: one category per allocation pair, one bar per group.
  const std::vector<Pair> cats(pairs.begin(), pairs.end());
  std::vector<double> ys{0.0};
  for (const auto& [g, m] : delta)
    for (const auto& [p, d] : m) ys.push_back(d);
  Axis x{-0.5, static_cast<double>(cats.size()) - 0.5, false, "allocation (f_dense, f_prune)"};
  SvgPlot plot("Final loss above the best allocation", x,
               fit_axis(ys, "loss - best loss in group", false, true));
  std::vector<std::pair<double, std::string>> ticks;
  for (std::size_t c = 0; c < cats.size(); ++c)
    ticks.emplace_back(static_cast<double>(c), pair_name(cats[c].first, cats[c].second));
  plot.x_categories(ticks);
  const double width = 0.8 / static_cast<double>(std::max<std::size_t>(1, delta.size()));
  std::size_t gi = 0;
  for (const auto& [g, m] : delta) {
    for (std::size_t c = 0; c < cats.size(); ++c) {
      const auto it = m.find(cats[c]);
      if (it == m.end()) continue;
      const double x0 = static_cast<double>(c) - 0.4 + width * static_cast<double>(gi);
      plot.rect(x0, x0 + width * 0.9, 0.0, it->second, series_color(gi));
    }
    plot.points({}, series_color(gi), group_name(g.first, g.second));
    ++gi;
  }
  plot.note("best: " + pair_name(top.first, top.second));
  write_csv(csv, t);
  plot.save(svg);
  return out;
}

ReportOutput lr_bs_sweep(const Table& in, const std::filesystem::path& csv,
                         const std::filesystem::path& svg) {
  ReportOutput out;
  out.table = in;
  Table& t = out.table;
  t.columns.push_back("delta_vs_best");
  std::map<std::pair<double, double>, double> cell;  // (lr, batch) -> lowest loss
  double best = INFINITY;
  std::pair<double, double> arg{0, 0};
  for (std::size_t i = 0; i < in.rows.size(); ++i) {
    const double loss = in.number(i, "final_loss");
    if (!row_ok(in, i) || !std::isfinite(loss)) continue;
    const std::pair<double, double> k{in.number(i, "learning_rate"), in.number(i, "batch_size")};
    const auto it = cell.find(k);
    if (it == cell.end() || loss < it->second) cell[k] = loss;
    if (loss < best) {
      best = loss;
      arg = k;
    }
  }
  if (cell.empty()) throw SchemaError("results contain no successful rows");
  double worst = -INFINITY;
  for (std::size_t i = 0; i < in.rows.size(); ++i) {
    const double loss = in.number(i, "final_loss");
    const bool ok = row_ok(in, i) && std::isfinite(loss);
    t.rows[i].push_back(ok ? num(loss - best) : "");
    if (ok) worst = std::max(worst, loss - best);
  }
  out.summary.push_back("best learning_rate=" + num(arg.first, "%g") +
                        " batch_size=" + num(arg.second, "%g") + " final_loss=" +
                        num(best, "%.6g") + "; worst cell +" + num(worst, "%.4g") +
                        " vs optimum");

  std::set<double> lrs, batches;
  for (const auto& [k, v] : cell) {
    lrs.insert(k.first);
    batches.insert(k.second);
  }
  const std::vector<double> lr_v(lrs.begin(), lrs.end()), b_v(batches.begin(), batches.end());
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& [k, v] : cell) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  SvgPlot plot("Final loss by learning rate and batch size",
               {-0.5, static_cast<double>(b_v.size()) - 0.5, false, "batch size"},
               {-0.5, static_cast<double>(lr_v.size()) - 0.5, false, "learning rate"});
  std::vector<std::pair<double, std::string>> xt, yt;
  for (std::size_t j = 0; j < b_v.size(); ++j) xt.emplace_back(j, num(b_v[j], "%g"));
  for (std::size_t i = 0; i < lr_v.size(); ++i) yt.emplace_back(i, num(lr_v[i], "%g"));
  plot.x_categories(xt);
  plot.y_categories(yt);
  for (std::size_t i = 0; i < lr_v.size(); ++i)
    for (std::size_t j = 0; j < b_v.size(); ++j) {
      const auto it = cell.find({lr_v[i], b_v[j]});
      if (it == cell.end()) continue;
      const double shade = hi > lo ? (it->second - lo) / (hi - lo) : 0.0;
      plot.rect(j - 0.5, j + 0.5, i - 0.5, i + 0.5, heat_color(0.15 + 0.6 * shade),
                num(it->second, "%.4f"));
    }
  plot.note("darker = higher loss");
  write_csv(csv, t);
  plot.save(svg);
  return out;
}

ReportOutput fit_report(const Table& in, const std::filesystem::path& csv,
                        const std::filesystem::path& svg) {
  ReportOutput out;
  out.table = in;
  std::vector<std::pair<double, double>> pts;
  std::vector<double> all;
  double sum = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < in.rows.size(); ++i) {
    const double a = in.number(i, "final_loss"), p = in.number(i, "predicted_loss");
    if (!row_ok(in, i) || !std::isfinite(a) || !std::isfinite(p)) continue;
    pts.emplace_back(a, p);
    all.push_back(a);
    all.push_back(p);
    sum += std::fabs(p - a);
    worst = std::max(worst, std::fabs(p - a));
  }
  if (pts.empty()) throw SchemaError("results contain no successful rows");
  out.summary.push_back("records " + std::to_string(pts.size()) + ", mean |predicted - actual| " +
                        num(sum / static_cast<double>(pts.size()), "%.4g") + ", max " +
                        num(worst, "%.4g"));
  Axis ax = fit_axis(all, "actual final loss");
  Axis ay = ax;
  ay.label = "predicted final loss";
  SvgPlot plot("Predicted vs actual final loss", ax, ay);
  plot.polyline({{ax.lo, ax.lo}, {ax.hi, ax.hi}}, "#999999", "y = x", true);
  plot.points(pts, series_color(0), "runs");
  write_csv(csv, in);
  plot.save(svg);
  return out;
}

ReportOutput prescription_report(const Table& in, const std::filesystem::path& csv,
                                 const std::filesystem::path& svg) {
  ReportOutput out;
  out.table = in;
  double best = INFINITY;
  std::size_t arg = 0;
  std::vector<double> ys{0.0};
  for (std::size_t i = 0; i < in.rows.size(); ++i) {
    const double l = in.number(i, "lifetime_flops");
    ys.push_back(l);
    if (std::isfinite(l) && l < best) {
      best = l;
      arg = i;
    }
  }
  if (!std::isfinite(best)) throw SchemaError("results contain no lifetime FLOPs");
  std::string line = "lowest lifetime compute: " + in.text(arg, "label") + " (" +
                      num(best, "%.4g") + " FLOPs, avg params " +
                      num(in.number(arg, "avg_params"), "%.4g") + ", final params " +
                      num(in.number(arg, "final_params"), "%.4g") + ", tokens " +
                      num(in.number(arg, "tokens"), "%.4g") + ")";
  for (std::size_t i = 0; i < in.rows.size(); ++i)
    if (i != arg)
      line += "; saves " + num(100.0 * (1.0 - best / in.number(i, "lifetime_flops")), "%.1f") +
              "% vs " + in.text(i, "label");
  out.summary.push_back(line);

  SvgPlot plot("Lifetime compute by prescription",
               {-0.5, static_cast<double>(in.rows.size()) - 0.5, false, "prescription"},
               fit_axis(ys, "FLOPs", false, true));
  std::vector<std::pair<double, std::string>> ticks;
  for (std::size_t i = 0; i < in.rows.size(); ++i) {
    const double tr = in.number(i, "train_flops"), inf = in.number(i, "inference_flops");
    plot.rect(i - 0.3, i + 0.3, 0.0, tr, series_color(0));
    plot.rect(i - 0.3, i + 0.3, tr, tr + inf, series_color(1));
    ticks.emplace_back(static_cast<double>(i), in.text(i, "label"));
  }
  plot.x_categories(ticks);
  plot.points({}, series_color(0), "training");
  plot.points({}, series_color(1), "inference");
  write_csv(csv, in);
  plot.save(svg);
  return out;
}

ReportOutput trajectory_report(const Table& in, const std::filesystem::path& csv,
                               const std::filesystem::path& svg) {
  ReportOutput out;
  out.table = in;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  std::vector<std::string> order;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < in.rows.size(); ++i) {
    const double c = in.number(i, "compute"), l = in.number(i, "loss");
    if (!row_ok(in, i) || !std::isfinite(c) || !std::isfinite(l)) continue;
    const std::string name = in.has("series") ? in.text(i, "series") : "";
    if (!series.count(name)) order.push_back(name);
    series[name].emplace_back(c, l);
    xs.push_back(c);
    ys.push_back(l);
  }
  if (xs.empty()) throw SchemaError("results contain no curve points");
  bool log_x = true, log_y = true;
  for (double v : xs) log_x &= v > 0.0;
  for (double v : ys) log_y &= v > 0.0;
  SvgPlot plot("Loss vs effective compute", fit_axis(xs, "effective compute (FLOPs)", log_x),
               fit_axis(ys, "loss", log_y));
  for (std::size_t s = 0; s < order.size(); ++s) {
    const auto& pts = series[order[s]];
    plot.polyline(pts, series_color(s), order[s]);
    out.summary.push_back((order[s].empty() ? std::string("curve") : order[s]) + ": final loss " +
                          num(pts.back().second, "%.6g") + " at compute " +
                          num(pts.back().first, "%.4g") + " (" + std::to_string(pts.size()) +
                          " points)");
  }
  write_csv(csv, in);
  plot.save(svg);
  return out;
}

}  // namespace

std::string_view to_string(ReportKind k) {
  switch (k) {
    case ReportKind::kScheduleSweep: return "schedule_sweep";
    case ReportKind::kLrBatchSweep: return "lr_bs_sweep";
    case ReportKind::kFit: return "fit";
    case ReportKind::kPrescription: return "prescription";
    case ReportKind::kTrajectory: return "trajectory";
  }
  return "?";
}

ReportKind report_kind_from_string(std::string_view s) {
  for (ReportKind k : {ReportKind::kScheduleSweep, ReportKind::kLrBatchSweep, ReportKind::kFit,
                       ReportKind::kPrescription, ReportKind::kTrajectory})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown report kind '" + std::string(s) +
                    "' (schedule_sweep|lr_bs_sweep|fit|prescription|trajectory)");
}

std::vector<std::string> required_columns(ReportKind k) {
  switch (k) {
    case ReportKind::kScheduleSweep:
      return {"dense_fraction", "prune_fraction", "sparsity", "duration", "final_loss"};
    case ReportKind::kLrBatchSweep: return {"learning_rate", "batch_size", "final_loss"};
    case ReportKind::kFit: return {"final_loss", "predicted_loss"};
    case ReportKind::kPrescription:
      return {"label", "avg_params", "final_params", "tokens", "train_flops", "inference_flops",
              "lifetime_flops"};
    case ReportKind::kTrajectory: return {"compute", "loss"};
  }
  return {};
}

ReportOutput write_report(const Table& results, ReportKind kind,
                          const std::filesystem::path& out_dir, const std::string& stem) {
  if (results.rows.empty()) throw SchemaError("results table has no rows");
  results.require(required_columns(kind));
  const std::string base = stem.empty() ? std::string(to_string(kind)) : stem;
  const auto csv = out_dir / (base + ".csv");
  const auto svg = out_dir / (base + ".svg");
  ReportOutput out;
  switch (kind) {
    case ReportKind::kScheduleSweep: out = schedule_sweep(results, csv, svg); break;
    case ReportKind::kLrBatchSweep: out = lr_bs_sweep(results, csv, svg); break;
    case ReportKind::kFit: out = fit_report(results, csv, svg); break;
    case ReportKind::kPrescription: out = prescription_report(results, csv, svg); break;
    case ReportKind::kTrajectory: out = trajectory_report(results, csv, svg); break;
  }
  out.csv = csv;
  out.svg = svg;
  return out;
}

Table fit_table(std::span<const RunRecord> data, const lawfit::ScalingLawFit& fit) {
  Table t;
  t.columns = {"label", "avg_params", "total_tokens", "sparsity", "final_loss", "predicted_loss",
               "residual"};
  for (const RunRecord& r : data) {
    const double p = lawfit::predict_loss(fit, r.avg_params, r.total_tokens);
    t.rows.push_back({r.label, num(r.avg_params), num(r.total_tokens), num(r.sparsity),
                      num(r.final_loss), num(p), num(p - r.final_loss)});
  }
  return t;
}

Table fit_table(std::span<const RunRecord> data, const lawfit::FrantarLawFit& fit) {
  Table t;
  t.columns = {"label", "avg_params", "total_tokens", "sparsity", "final_loss", "predicted_loss",
               "residual"};
  for (const RunRecord& r : data) {
    const double p = lawfit::predict_loss(fit, r.sparsity, r.final_nonzero_params, r.total_tokens);
    t.rows.push_back({r.label, num(r.avg_params), num(r.total_tokens), num(r.sparsity),
                      num(r.final_loss), num(p), num(p - r.final_loss)});
  }
  return t;
}

Table prescription_table(const std::vector<std::pair<std::string, prescribe::Prescription>>& rows) {
  Table t;
  t.columns = {"label",          "avg_params",  "final_params",     "tokens",
               "sparsity",       "compression", "inference_tokens", "train_flops",
               "inference_flops", "lifetime_flops", "achieved_loss"};
  for (const auto& [label, p] : rows)
    t.rows.push_back({label, num(p.avg_params), num(p.final_params), num(p.tokens),
                      num(p.sparsity), num(p.compression), num(p.inference_tokens),
                      num(p.train_flops), num(p.inference_flops), num(p.lifetime_flops),
                      num(p.achieved_loss)});
  return t;
}

Table curve_table(const std::vector<theorysim::CurvePoint>& curve, const std::string& series) {
  Table t;
  t.columns = {"series", "compute", "loss"};
  for (const auto& p : curve) t.rows.push_back({series, num(p.compute), num(p.loss)});
  return t;
}

Table curve_table(const std::vector<trainer::CurvePoint>& curve, const std::string& series) {
  Table t;
  t.columns = {"series", "step", "tokens", "compute", "active_params", "train_loss", "loss"};
  for (const auto& p : curve)
    t.rows.push_back({series, std::to_string(p.step), std::to_string(p.tokens), num(p.compute),
                      std::to_string(p.active_params), num(p.train_loss), num(p.eval_loss)});
  return t;
}

void append_rows(Table& a, const Table& b) {
  if (a.columns.empty()) {
    a = b;
    return;
  }
  if (a.columns != b.columns) throw SchemaError("cannot append tables with different columns");
  a.rows.insert(a.rows.end(), b.rows.begin(), b.rows.end());
}

}  // namespace sparsescale::cli
