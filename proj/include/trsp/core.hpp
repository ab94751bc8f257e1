#pragma once

// Domain model for technician routing and scheduling: tasks, master and daily
// technicians, travel times, routes and solutions. All times are integer
// minutes from the horizon origin (day 0, 00:00).

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace trsp {

using Minutes = std::int64_t;
using SkillId = int;
using SkillSet = std::vector<SkillId>;  // sorted, unique

inline constexpr Minutes kMinutesPerDay = 1440;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TimeWindow {
  Minutes start = 0;
  Minutes end = 0;

  Minutes span() const { return end - start; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

struct Task {
  std::string id;
  SkillSet required_skills;
  Minutes duration = 0;
  TimeWindow window;
  Minutes penalty = 0;
  bool digitizable = false;
  // Remote-handled after a digitization investment: no visit, no penalty.
  bool digitized = false;
  int location = 0;
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Task&, const Task&) = default;
};

struct Shift {
  int day = 0;
  TimeWindow window;
  friend bool operator==(const Shift&, const Shift&) = default;
};

struct MasterTechnician {
  std::string id;
  int location = 0;
  double x = 0.0;
  double y = 0.0;
  SkillSet skills;
  std::vector<Shift> shifts;
  bool is_new_candidate = false;

  friend bool operator==(const MasterTechnician&, const MasterTechnician&) = default;
};

struct DailyTechnician {
  std::string id;  // "<master id>#<day>"
  int master = 0;  // index into Instance::masters
  int day = 0;
  int depot = 0;  // location index
  TimeWindow window;
  Minutes capacity = 0;
  SkillSet skills;
  bool is_new = false;

  friend bool operator==(const DailyTechnician&, const DailyTechnician&) = default;
};

/// Dense travel-time matrix over locations.
class TravelMatrix {
 public:
  TravelMatrix() = default;
  explicit TravelMatrix(int n) : n_(n), data_(static_cast<std::size_t>(n) * n, 0) {}

  int size() const { return n_; }
  Minutes operator()(int from, int to) const { return data_[index(from, to)]; }
  void set(int from, int to, Minutes value) { data_[index(from, to)] = value; }

  /// Returns one message per (i, j, k) triple breaking the triangle
  /// inequality, capped at `limit`.
  std::vector<std::string> triangle_violations(std::size_t limit = 10) const;

  friend bool operator==(const TravelMatrix&, const TravelMatrix&) = default;

 private:
  std::size_t index(int from, int to) const {
    return static_cast<std::size_t>(from) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(to);
  }
  int n_ = 0;
  std::vector<Minutes> data_;
};

struct Instance {
  std::string name;
  int horizon_days = 1;
  Minutes travel_cap = 100;
  std::vector<std::string> skills;
  std::vector<Task> tasks;
  std::vector<MasterTechnician> masters;
  std::vector<DailyTechnician> dailies;  // derived, see rebuild_dailies
  TravelMatrix travel;
  // Extra minutes appended to a daily technician's window (purchased overtime).
  std::map<std::string, Minutes> overtime;
  // Whether `travel` came from an explicit matrix rather than coordinates.
  bool explicit_travel = false;

  /// Regenerates `dailies` from `masters` and `overtime`.
  void rebuild_dailies();

  int task_index(const std::string& id) const;
  int master_index(const std::string& id) const;
  int daily_index(const std::string& id) const;
  SkillId skill_index(const std::string& name) const;

  /// Travel time between the locations of two tasks.
  Minutes task_travel(int from_task, int to_task) const {
    return travel(tasks[from_task].location, tasks[to_task].location);
  }
  Minutes depot_to_task(int daily, int task) const {
    return travel(dailies[daily].depot, tasks[task].location);
  }
  Minutes task_to_depot(int task, int daily) const {
    return travel(tasks[task].location, dailies[daily].depot);
  }

  friend bool operator==(const Instance&, const Instance&) = default;
};

bool is_subset(std::span<const SkillId> sub, std::span<const SkillId> super);
SkillSet normalized(SkillSet skills);

/// One daily technician per (master, shift), ids `master#day`.
std::vector<DailyTechnician> expand_daily(const std::vector<MasterTechnician>& masters,
                                          int horizon_days);

/// Throws InputError describing the first broken invariant.
void validate_instance(const Instance& instance);

/// Latest-start arithmetic for serving `task` inside the technician's window,
/// optionally extended by overtime. Return travel is not included.
std::optional<TimeWindow> tw_feasible(const Task& task, const DailyTechnician& tech,
                                      Minutes overtime_minutes);

/// True if neither service order fits inside the windows, ignoring travel.
bool overlap(const Task& a, const Task& b);

struct EligibilityOptions {
  bool relax_skills = false;
  Minutes overtime_minutes = 0;  // 0 disables the overtime alternative
};

/// Task indices servable by daily technician `daily` (sorted). Digitized
/// tasks are never eligible.
std::vector<int> eligible_tasks(int daily, const Instance& instance,
                                const EligibilityOptions& options = {});

struct Visit {
  std::string task;
  Minutes start = 0;
  friend bool operator==(const Visit&, const Visit&) = default;
};

struct Route {
  std::string technician;
  std::vector<Visit> visits;
  Minutes travel_cost = 0;
  friend bool operator==(const Route&, const Route&) = default;
};

struct Solution {
  std::vector<Route> routes;
  std::vector<std::string> unserved;
  std::vector<std::string> digitized;
  Minutes objective = 0;
  friend bool operator==(const Solution&, const Solution&) = default;
};

struct Violation {
  std::string constraint;  // chaining, task_window, tech_window, departure, return, skills
  std::string task;
  std::string detail;
};

std::vector<Violation> validate_route(const Route& route, const Instance& instance);

/// Depot -> visits -> depot travel of a route, from the matrix.
Minutes route_travel(const Route& route, const Instance& instance);

/// Travel plus penalties of unserved tasks. Throws InputError unless routes,
/// unserved and digitized partition the task set.
Minutes solution_objective(const Solution& solution, const Instance& instance);

/// Sum of penalties of the unserved tasks in `solution`.
Minutes solution_penalty(const Solution& solution, const Instance& instance);

/// Earliest-start schedule of a task sequence for one daily technician.
struct Schedule {
  std::vector<Minutes> starts;
  Minutes travel = 0;
};

/// Returns nullopt when the sequence breaks a window. Waiting is allowed.
std::optional<Schedule> schedule_sequence(const Instance& instance, int daily,
                                          std::span<const int> tasks);

/// Builds a Route (ids, earliest starts, travel) from a feasible sequence.
Route make_route(const Instance& instance, int daily, std::span<const int> tasks);

/// Indices of daily technicians usable for routing (hired, non-candidate).
std::vector<int> routing_dailies(const Instance& instance);

}  // namespace trsp
