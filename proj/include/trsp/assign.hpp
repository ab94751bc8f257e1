#pragma once

// Task-assignment approximations of the routing problem: each daily
// technician gets a task set whose travel is estimated by k times the longest
// leg between two assigned tasks or from the depot. The investment variant
// adds overtime, digitization, skill-bundle upgrades and new technicians.

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "trsp/core.hpp"
#include "trsp/io.hpp"
#include "trsp/lp.hpp"

namespace trsp {

inline constexpr double kDefaultTravelScale = 5.0;

/// A task a daily technician may take once the listed investments are made.
struct TaskOption {
  int task = 0;
  bool needs_overtime = false;
  std::vector<int> bundles;  // catalog bundle indices covering the missing skills
};

/// What one daily technician can do under the catalog's investments.
struct TechOptions {
  int daily = 0;
  std::vector<TaskOption> options;
  bool overtime_available = false;        // an overtime variable is worth having
  std::vector<int> bundles;               // union of the options' bundles, sorted
};

/// Options for every daily technician of `instance`, which must already
/// contain the catalog's candidates (see with_candidates). Without a catalog,
/// only plain eligibility is used.
std::vector<TechOptions> investment_options(const Instance& instance,
                                            const InvestmentCatalog* catalog);

/// k * max(c over pairs of assigned tasks, c from the depot to each task).
double estimated_travel(const Instance& instance, int daily, const std::vector<int>& tasks,
                        double k);

struct AssignModel {
  Instance instance;  // includes new-technician candidates for the investment variant
  lp::LinearModel model;
  double k = kDefaultTravelScale;
  bool invest = false;
  std::vector<TechOptions> techs;
  std::map<std::pair<int, int>, int> x;  // (daily, task)
  std::vector<int> y;                    // per task, -1 for digitized tasks
  std::map<int, int> zhat;               // daily
  std::map<int, int> u_ot;               // daily
  std::map<int, int> u_dig;              // task
  std::map<std::pair<int, int>, int> u_skill;  // (master, bundle)
  std::map<int, int> u_nt;               // candidate master
};

AssignModel build_assignment(const Instance& instance, double k = kDefaultTravelScale);
AssignModel build_assignment_invest(const Instance& instance, const InvestmentCatalog& catalog,
                                    double k = kDefaultTravelScale);

struct Assignment {
  std::map<int, std::vector<int>> tasks;  // daily -> assigned tasks (sorted)
  std::vector<int> unserved;
  InvestmentDecision decision;
  double objective = 0.0;
  lp::Status status = lp::Status::infeasible;
  double gap = 0.0;
};

/// Reads an integral point of the model. Throws InternalError on fractional
/// binaries.
Assignment extract_assignment(const AssignModel& model, const std::vector<double>& values);

Assignment solve_assignment(const AssignModel& model, const lp::MipOptions& options = {});

}  // namespace trsp
