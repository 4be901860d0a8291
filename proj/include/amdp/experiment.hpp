#pragma once

// N x seed sweeps of the sample-based solver with exact scoring.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "amdp/reduction.hpp"
#include "amdp/report.hpp"

namespace amdp {

/// Worker count: AMDP_LAB_THREADS if set, else the hardware concurrency.
inline std::size_t worker_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("AMDP_LAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = static_cast<std::size_t>(v);
  }
  return n;
}

/// Runs fn(i) for i in [0, count) on up to `workers` threads. The first
/// exception thrown by any task is rethrown.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct ExperimentConfig {
  std::string instance_id;
  TabularMdp truth;
  double epsilon = 0.25;
  double delta = 0.1;
  /// Empty means: use the exact bias span (clamped to >= 1).
  std::optional<double> H_bound;
  std::vector<std::size_t> n_list;
  std::vector<std::uint64_t> seeds;
  bool record_timing = false;
};

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n_list.empty()) throw ValidationError("experiment needs a non-empty N list");
  for (std::size_t n : cfg.n_list) {
    if (n == 0) throw ValidationError("every N must be positive");
  }
  if (cfg.seeds.empty()) throw ValidationError("experiment needs at least one seed");
  if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size()) {
    throw ValidationError("experiment seeds must be distinct");
  }
}

struct ExperimentRow {
  std::string instance_id;
  std::size_t N = 0;
  std::uint64_t seed = 0;
  double gap = 0.0;
  bool success = false;
  std::optional<double> wallclock_ms;
  std::uint64_t total_samples = 0;
};

/// Oracle H for the reduction schedule: sp(h*) clamped to at least 1.
inline double oracle_h_bound(const AmdpOptimum& opt) { return std::max(1.0, opt.H); }

inline std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg,
                                                 const AmdpOptimum& opt,
                                                 std::size_t workers = worker_count()) {
  validate_config(cfg);
  const double H = cfg.H_bound ? *cfg.H_bound : oracle_h_bound(opt);
  const std::size_t S = cfg.truth.num_states(), A = cfg.truth.num_actions();

  std::vector<ExperimentRow> rows(cfg.n_list.size() * cfg.seeds.size());
  parallel_for(rows.size(), workers, [&](std::size_t cell) {
    const std::size_t N = cfg.n_list[cell / cfg.seeds.size()];
    const std::uint64_t seed = cfg.seeds[cell % cfg.seeds.size()];
    const ReductionParams params = reduction_params(cfg.epsilon, cfg.delta, H, S, A, N);
    const auto start = std::chrono::steady_clock::now();
    const auto records = empirical_error(cfg.truth, opt, params, {seed});
    const auto stop = std::chrono::steady_clock::now();
    ExperimentRow& row = rows[cell];
    row.instance_id = cfg.instance_id;
    row.N = N;
    row.seed = seed;
    row.gap = records.front().gap;
    row.success = records.front().success;
    row.total_samples = records.front().total_samples;
    if (cfg.record_timing) {
      row.wallclock_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    }
  });
  std::stable_sort(rows.begin(), rows.end(), [](const ExperimentRow& a, const ExperimentRow& b) {
    return a.N != b.N ? a.N < b.N : a.seed < b.seed;
  });
  return rows;
}

/// Columns: instance_id,N,seed,gap,success,wallclock_ms,total_samples.
/// wallclock_ms is "NA" unless timing was recorded.
inline std::string experiment_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  out << "instance_id,N,seed,gap,success,wallclock_ms,total_samples\n";
  for (const auto& r : rows) {
    out << r.instance_id << ',' << r.N << ',' << r.seed << ',' << format_file(r.gap) << ','
        << (r.success ? "true" : "false") << ','
        << (r.wallclock_ms ? format_file(*r.wallclock_ms) : std::string("NA")) << ','
        << r.total_samples << '\n';
  }
  return out.str();
}

/// Median gap per N, in the order of cfg.n_list.
inline std::vector<double> median_gap_by_n(const std::vector<ExperimentRow>& rows,
                                           const std::vector<std::size_t>& n_list) {
  std::vector<double> out;
  for (std::size_t N : n_list) {
    std::vector<TrialRecord> recs;
    for (const auto& r : rows) {
      if (r.N == N) recs.push_back({r.seed, r.gap, r.success, r.total_samples, {}});
    }
    out.push_back(median_gap(std::move(recs)));
  }
  return out;
}

}  // namespace amdp
