#include "sparsescale/cli/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include "sparsescale/core/errors.hpp"

namespace sparsescale::cli {

std::string content_key(const Runner& runner, const SweepPoint& point) {
  return hex(stable_hash(runner.name() + "|" + runner.fingerprint() + "|" + point.canonical()));
}

SweepSummary run_sweep(const std::vector<SweepPoint>& points, const Runner& runner,
                       ResultStore& store, const SweepOptions& options) {
  SweepSummary summary;
  summary.rows.resize(points.size());
  const auto done = store.latest();

  std::vector<std::size_t> todo;
  std::mutex report_mutex;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::string key = content_key(runner, points[i]);
    const auto it = done.find(key);
    if (it != done.end() && (it->second.ok || !options.retry_failed)) {
      summary.rows[i] = it->second;
      ++summary.skipped;
      if (options.on_record) options.on_record(it->second, false);
      continue;
    }
    SweepRecord& r = summary.rows[i];
    r.key = key;
    r.index = i;
    r.runner = runner.name();
    r.point = points[i];
    r.seed = derive_seed(options.seed, key);
    todo.push_back(i);
  }

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t t = next++; t < todo.size(); t = next++) {
      SweepRecord& r = summary.rows[todo[t]];
      const auto start = std::chrono::steady_clock::now();
      try {
        const RunOutput out = runner.run(r.point, r.seed);
        r.ok = true;
        r.record = out.record;
        r.effective_compute = out.effective_compute;
      } catch (const InfeasibleError& e) {
        r.error = e.what();
        r.error_code = 2;
      } catch (const IllPosedError& e) {
        r.error = e.what();
        r.error_code = 2;
      } catch (const ConfigError& e) {
        r.error = e.what();
        r.error_code = 1;
      } catch (const std::exception& e) {
        r.error = e.what();
        r.error_code = 3;
      }
      r.elapsed_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      store.append(r);
      if (options.on_record) {
        std::lock_guard lock(report_mutex);
        options.on_record(r, true);
      }
    }
  };
  const int workers =
      static_cast<int>(std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, options.workers)), 1,
                                               std::max<std::size_t>(1, todo.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  summary.executed = todo.size();
  for (const SweepRecord& r : summary.rows)
    if (!r.ok) ++summary.failed;
  return summary;
}

}  // namespace sparsescale::cli
