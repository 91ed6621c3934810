#ifndef ISORC_ESTIMATE_HPP
#define ISORC_ESTIMATE_HPP

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "isorc/rng.hpp"
#include "isorc/stats.hpp"

namespace isorc {

struct EstimateRecord {
  std::string event_id;
  double estimate = 0.0;
  Interval wilson;
  std::int64_t count = 0;
  std::int64_t successes = 0;
  double tau_int = 1.0;
  double wall_seconds = 0.0;
};

// Runs fn(replica_index, rng) for every replica on a worker pool.
// Replica k draws its generator from replica_seed(master, k), and results
// are collected by replica index, so output does not depend on
// scheduling.
template <class Result>
std::vector<Result> run_replicas(int replicas, int threads, std::uint64_t master_seed,
                                 const std::function<Result(int, Rng&)>& fn) {
  std::vector<Result> results(replicas);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      int k = next.fetch_add(1);
      if (k >= replicas) return;
      Rng rng(replica_seed(master_seed, static_cast<std::uint64_t>(k)));
      results[k] = fn(k, rng);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

struct ReplicaIndicator {
  std::int64_t successes = 0;
  std::int64_t count = 0;
  std::vector<double> series;  // optional per-sweep indicator series
};

inline EstimateRecord summarize(const std::string& event_id,
                                const std::vector<ReplicaIndicator>& replicas,
                                double wall_seconds) {
  EstimateRecord rec;
  rec.event_id = event_id;
  std::vector<double> merged_series;
  for (const auto& r : replicas) {
    rec.successes += r.successes;
    rec.count += r.count;
    merged_series.insert(merged_series.end(), r.series.begin(), r.series.end());
  }
  if (rec.count > 0) {
    rec.estimate = static_cast<double>(rec.successes) / static_cast<double>(rec.count);
    rec.wilson = wilson_interval(rec.successes, rec.count);
  }
  if (merged_series.size() >= 8) rec.tau_int = integrated_autocorrelation(merged_series);
  rec.wall_seconds = wall_seconds;
  return rec;
}

class StopWatch {
 public:
  StopWatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace isorc

#endif
