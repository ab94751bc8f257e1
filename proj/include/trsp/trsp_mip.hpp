#pragma once

// Exact routing model: arc variables per daily technician, start times and
// unserved indicators, solved with the built-in branch and bound.

#include <map>
#include <utility>
#include <vector>

#include "trsp/core.hpp"
#include "trsp/lp.hpp"

namespace trsp {

inline constexpr int kDepotNode = -1;

struct TrspTech {
  int daily = 0;
  std::vector<int> tasks;                   // V(t), task indices
  std::map<std::pair<int, int>, int> arc;   // (from, to) node -> x variable; depot = kDepotNode
  std::map<int, int> z;                     // task -> start-time variable
  std::map<int, TimeWindow> start_bounds;   // task -> [earliest, latest] start
};

struct TrspModel {
  lp::LinearModel model;
  std::vector<TrspTech> techs;
  std::vector<int> y;  // per task; -1 for digitized tasks
  std::map<std::pair<int, int>, double> big_m;  // (x variable, tech slot) -> M
};

/// Start-time range for `task` on `daily` that respects both windows, the
/// departure from and the return to the depot. Empty when unservable.
std::optional<TimeWindow> start_range(const Instance& instance, int daily, int task);

TrspModel build_trsp(const Instance& instance);

/// Values of every model variable for a given solution (used as incumbent).
std::vector<double> trsp_point(const TrspModel& model, const Instance& instance,
                               const Solution& solution);

/// Routes read off the arc variables; start times are the earliest starts of
/// each extracted sequence.
Solution extract_trsp(const TrspModel& model, const Instance& instance,
                      const std::vector<double>& values);

struct TrspOptions {
  double time_limit_seconds = 60.0;
  bool use_heuristic_incumbent = true;
};

struct TrspResult {
  Solution solution;
  lp::Status status = lp::Status::infeasible;
  double bound = 0.0;
  double gap = 0.0;
  std::int64_t nodes = 0;
};

TrspResult solve_trsp(const Instance& instance, const TrspOptions& options = {});

}  // namespace trsp
