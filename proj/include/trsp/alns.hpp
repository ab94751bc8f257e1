#pragma once

// Adaptive large neighborhood search with record-to-record acceptance, a
// pool of promising paths and a set-cover recombination of that pool.

#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "trsp/core.hpp"

namespace trsp {

struct AlnsConfig {
  int retries = 3;
  double seconds_per_retry = 100.0;
  // When positive the retry ends after this many iterations, which keeps a
  // seeded run reproducible; seconds_per_retry still caps the wall time.
  std::int64_t iterations_per_retry = 0;
  double destroy_min_fraction = 0.40;
  double destroy_max_fraction = 0.60;
  double rtr_start_threshold = 0.0015;
  double weight_decay = 0.99;
  double score_best = 33.0;
  double score_improve = 9.0;
  double score_accept = 13.0;
  std::size_t pool_cap = 25000;
  std::uint64_t seed = 1;
};

/// Throws InputError on out-of-range settings.
void validate_config(const AlnsConfig& config);

/// Working representation: one task sequence per routing daily technician.
struct RoutePlan {
  std::vector<int> dailies;             // routing daily technician indices
  std::vector<std::vector<int>> seqs;   // parallel to dailies
  std::vector<Minutes> travel;          // parallel to dailies
  std::vector<char> served;             // per task
};

RoutePlan empty_plan(const Instance& instance);
RoutePlan plan_from_solution(const Instance& instance, const Solution& solution);
Solution plan_to_solution(const Instance& instance, const RoutePlan& plan);
Minutes plan_objective(const Instance& instance, const RoutePlan& plan);

/// Tasks by nonincreasing penalty, each at its cheapest feasible position over
/// all routing dailies, skipped when that costs more travel than its penalty.
Solution initial_greedy(const Instance& instance);

enum class DestroyMethod { random, route };
enum class RepairMethod { greedy, regret };

/// Returns the number of removed tasks. Survivors keep their order and are
/// rescheduled at earliest starts.
int destroy(const Instance& instance, RoutePlan& plan, DestroyMethod method, std::mt19937_64& rng,
            const AlnsConfig& config = {});

/// Inserts unserved tasks while some insertion costs less travel than the
/// task's penalty. Regret ranks tasks by second-best minus best delta over
/// distinct routes (a single feasible route counts as infinite regret).
void repair(const Instance& instance, RoutePlan& plan, RepairMethod method);

Solution destroy(const Instance& instance, const Solution& solution, DestroyMethod method,
                 std::mt19937_64& rng, const AlnsConfig& config = {});
Solution repair(const Instance& instance, const Solution& partial, RepairMethod method);

struct PoolEntry {
  int daily = 0;
  std::vector<int> tasks;
  Minutes travel = 0;
  Minutes potential = 0;  // best objective of an accepted solution using it
};

class PathPool {
 public:
  using Key = std::pair<int, std::vector<int>>;

  void record(const Instance& instance, const RoutePlan& plan, Minutes objective);
  void add(PoolEntry entry);
  void merge(const PathPool& other);
  /// Keeps the `cap` entries of lowest potential (ties by key).
  void prune(std::size_t cap);

  std::size_t size() const { return entries_.size(); }
  const std::map<Key, PoolEntry>& entries() const { return entries_; }

 private:
  std::map<Key, PoolEntry> entries_;
};

struct AlnsStats {
  std::int64_t iterations = 0;
  std::int64_t improvements = 0;
  std::int64_t last_improvement_iteration = 0;
  std::vector<double> destroy_weights;
  std::vector<double> repair_weights;
  std::vector<Minutes> best_trace;  // best objective after each iteration of the winning retry
  double seconds = 0.0;
};

struct AlnsResult {
  Solution best;
  PathPool pool;
  AlnsStats stats;
};

AlnsResult run_alns(const Instance& instance, const AlnsConfig& config = {});

/// Chooses at most one pooled path per daily technician covering tasks or
/// paying their penalty. Returns the incumbent if that is no worse.
Solution setcover_finalize(const PathPool& pool, const Instance& instance, const Solution& incumbent,
                           double time_limit_seconds = 60.0);

}  // namespace trsp
