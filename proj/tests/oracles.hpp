#pragma once

// Brute-force reference optima computed straight from instance data.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "trsp/core.hpp"

namespace trsp::testing {

/// Earliest-start feasibility and travel of one sequence, from raw data.
inline bool oracle_schedule(const Instance& inst, const DailyTechnician& tech,
                            const std::vector<int>& seq, Minutes& travel) {
  Minutes time = tech.window.start;
  int loc = tech.depot;
  travel = 0;
  for (int i : seq) {
    const auto& t = inst.tasks[i];
    const Minutes c = inst.travel(loc, t.location);
    const Minutes start = std::max(time + c, t.window.start);
    if (start + t.duration > t.window.end) return false;
    travel += c;
    time = start + t.duration;
    loc = t.location;
  }
  const Minutes back = seq.empty() ? 0 : inst.travel(loc, tech.depot);
  if (time + back > tech.window.end) return false;
  travel += back;
  return true;
}

/// Minimum travel per covered task subset for one technician, over every
/// permutation of every subset of the capable tasks.
inline std::map<std::uint32_t, Minutes> oracle_subset_costs(const Instance& inst, const DailyTechnician& tech) {
  std::vector<int> capable;
  for (int i = 0; i < static_cast<int>(inst.tasks.size()); ++i) {
    const auto& t = inst.tasks[i];
    if (t.digitized) continue;
    if (!std::includes(tech.skills.begin(), tech.skills.end(), t.required_skills.begin(), t.required_skills.end())) continue;
    if (inst.travel(tech.depot, t.location) > inst.travel_cap) continue;
    capable.push_back(i);
  }
  std::map<std::uint32_t, Minutes> best;
  best[0] = 0;
  const std::uint32_t n = static_cast<std::uint32_t>(capable.size());
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> seq;
    std::uint32_t tmask = 0;
    for (std::uint32_t b = 0; b < n; ++b) {
      if (mask & (1u << b)) {
        seq.push_back(capable[b]);
        tmask |= 1u << capable[b];
      }
    }
    std::sort(seq.begin(), seq.end());
    do {
      Minutes travel = 0;
      if (oracle_schedule(inst, tech, seq, travel)) {
        auto it = best.find(tmask);
        if (it == best.end() || travel < it->second) best[tmask] = travel;
      }
    } while (std::next_permutation(seq.begin(), seq.end()));
  }
  return best;
}

/// Optimal travel + unserved penalty over at most 20 tasks.
inline Minutes brute_force_trsp(const Instance& inst) {
  const int n = static_cast<int>(inst.tasks.size());
  const Minutes inf = std::numeric_limits<Minutes>::max() / 4;
  std::vector<Minutes> dp(1u << n, inf);
  dp[0] = 0;
  for (const auto& tech : inst.dailies) {
    if (tech.is_new) continue;
    const auto costs = oracle_subset_costs(inst, tech);
    std::vector<Minutes> next = dp;
    for (std::uint32_t cov = 0; cov < dp.size(); ++cov) {
      if (dp[cov] >= inf) continue;
      for (const auto& [mask, travel] : costs) {
        if (mask == 0 || (mask & cov)) continue;
        next[cov | mask] = std::min(next[cov | mask], dp[cov] + travel);
      }
    }
    dp = std::move(next);
  }
  Minutes best = inf;
  for (std::uint32_t cov = 0; cov < dp.size(); ++cov) {
    if (dp[cov] >= inf) continue;
    Minutes pen = 0;
    for (int i = 0; i < n; ++i) {
      if (!(cov & (1u << i)) && !inst.tasks[i].digitized) pen += inst.tasks[i].penalty;
    }
    best = std::min(best, dp[cov] + pen);
  }
  return best;
}

}  // namespace trsp::testing
