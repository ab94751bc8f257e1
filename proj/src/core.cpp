#include "trsp/core.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace trsp {

std::vector<std::string> TravelMatrix::triangle_violations(std::size_t limit) const {
  std::vector<std::string> out;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      for (int k = 0; k < n_; ++k) {
        if ((*this)(i, k) > (*this)(i, j) + (*this)(j, k)) {
          std::ostringstream msg;
          msg << "travel(" << i << "," << k << ")=" << (*this)(i, k) << " exceeds travel(" << i
              << "," << j << ")+travel(" << j << "," << k << ")";
          out.push_back(msg.str());
          if (out.size() >= limit) return out;
        }
      }
    }
  }
  return out;
}

bool is_subset(std::span<const SkillId> sub, std::span<const SkillId> super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

SkillSet normalized(SkillSet skills) {
  std::sort(skills.begin(), skills.end());
  skills.erase(std::unique(skills.begin(), skills.end()), skills.end());
  return skills;
}

std::vector<DailyTechnician> expand_daily(const std::vector<MasterTechnician>& masters,
                                          int horizon_days) {
  std::vector<DailyTechnician> out;
  for (std::size_t m = 0; m < masters.size(); ++m) {
    const auto& master = masters[m];
    for (const auto& shift : master.shifts) {
      if (shift.day < 0 || shift.day >= horizon_days) {
        throw InputError("master technician '" + master.id + "' has a shift on day " +
                         std::to_string(shift.day) + " outside the horizon of " +
                         std::to_string(horizon_days) + " days");
      }
      DailyTechnician t;
      t.id = master.id + "#" + std::to_string(shift.day);
      t.master = static_cast<int>(m);
      t.day = shift.day;
      t.depot = master.location;
      t.window = shift.window;
      t.capacity = shift.window.span();
      t.skills = master.skills;
      t.is_new = master.is_new_candidate;
      out.push_back(std::move(t));
    }
  }
  return out;
}

void Instance::rebuild_dailies() {
  dailies = expand_daily(masters, horizon_days);
  for (auto& t : dailies) {
    if (auto it = overtime.find(t.id); it != overtime.end()) {
      t.window.end += it->second;
      t.capacity = t.window.span();
    }
  }
}

namespace {

template <class Range>
int find_id(const Range& items, const std::string& id, const char* what) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].id == id) return static_cast<int>(i);
  }
  throw InputError(std::string("unknown ") + what + " id '" + id + "'");
}

}  // namespace

int Instance::task_index(const std::string& id) const { return find_id(tasks, id, "task"); }
int Instance::master_index(const std::string& id) const {
  return find_id(masters, id, "master technician");
}
int Instance::daily_index(const std::string& id) const {
  return find_id(dailies, id, "daily technician");
}

SkillId Instance::skill_index(const std::string& skill) const {
  auto it = std::find(skills.begin(), skills.end(), skill);
  if (it == skills.end()) throw InputError("unknown skill '" + skill + "'");
  return static_cast<SkillId>(it - skills.begin());
}

void validate_instance(const Instance& inst) {
  auto fail = [](const std::string& what) { throw InputError("invalid instance: " + what); };
  if (inst.horizon_days <= 0) fail("horizon_days must be positive");
  if (inst.travel_cap < 0) fail("travel_cap must be nonnegative");
  const int n_skills = static_cast<int>(inst.skills.size());
  const int n_loc = inst.travel.size();
  auto check_skills = [&](const SkillSet& s, const std::string& owner) {
    if (s != normalized(s)) fail(owner + ": skill set not sorted/unique");
    for (SkillId id : s) {
      if (id < 0 || id >= n_skills) fail(owner + ": skill index out of range");
    }
  };
  std::set<std::string> ids;
  for (const auto& t : inst.tasks) {
    const std::string owner = "task '" + t.id + "'";
    if (!ids.insert(t.id).second) fail("duplicate task id '" + t.id + "'");
    if (t.window.start < 0 || t.window.start > t.window.end) fail(owner + ": window start > end");
    if (t.duration <= 0) fail(owner + ": duration must be positive");
    if (t.duration > t.window.span()) fail(owner + ": duration exceeds window span");
    if (t.penalty < 0) fail(owner + ": negative penalty");
    if (t.digitized && !t.digitizable) fail(owner + ": digitized but not digitizable");
    if (t.location < 0 || t.location >= n_loc) fail(owner + ": location out of range");
    check_skills(t.required_skills, owner);
  }
  ids.clear();
  for (const auto& m : inst.masters) {
    const std::string owner = "master technician '" + m.id + "'";
    if (!ids.insert(m.id).second) fail("duplicate master id '" + m.id + "'");
    if (m.location < 0 || m.location >= n_loc) fail(owner + ": location out of range");
    check_skills(m.skills, owner);
    std::set<int> days;
    for (const auto& s : m.shifts) {
      if (s.window.start < 0 || s.window.start > s.window.end) fail(owner + ": shift start > end");
      if (!days.insert(s.day).second) fail(owner + ": overlapping shifts on day " + std::to_string(s.day));
    }
  }
  for (int i = 0; i < n_loc; ++i) {
    if (inst.travel(i, i) != 0) fail("travel matrix diagonal must be zero");
    for (int j = 0; j < n_loc; ++j) {
      if (inst.travel(i, j) < 0) fail("travel matrix has negative entries");
    }
  }
}

std::optional<TimeWindow> tw_feasible(const Task& task, const DailyTechnician& tech,
                                      Minutes overtime_minutes) {
  TimeWindow w{std::max(task.window.start, tech.window.start),
               std::min(task.window.end, tech.window.end + overtime_minutes) - task.duration};
  if (w.start > w.end) return std::nullopt;
  return w;
}

bool overlap(const Task& a, const Task& b) {
  const bool a_first = a.window.start + a.duration + b.duration <= b.window.end;
  const bool b_first = b.window.start + b.duration + a.duration <= a.window.end;
  return !a_first && !b_first;
}

std::vector<int> eligible_tasks(int daily, const Instance& inst, const EligibilityOptions& opt) {
  const auto& tech = inst.dailies[daily];
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(inst.tasks.size()); ++i) {
    const auto& task = inst.tasks[i];
    if (task.digitized) continue;
    if (!opt.relax_skills && !is_subset(task.required_skills, tech.skills)) continue;
    if (inst.depot_to_task(daily, i) > inst.travel_cap) continue;
    const bool fits = tw_feasible(task, tech, 0).has_value() ||
                      (opt.overtime_minutes > 0 && tw_feasible(task, tech, opt.overtime_minutes));
    if (fits) out.push_back(i);
  }
  return out;
}

std::vector<Violation> validate_route(const Route& route, const Instance& inst) {
  const int t = inst.daily_index(route.technician);
  const auto& tech = inst.dailies[t];
  std::vector<int> idx;
  idx.reserve(route.visits.size());
  for (const auto& v : route.visits) idx.push_back(inst.task_index(v.task));

  std::vector<Violation> out;
  auto add = [&](const char* what, std::size_t k, std::string detail) {
    out.push_back({what, route.visits[k].task, std::move(detail)});
  };
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& task = inst.tasks[idx[k]];
    const Minutes z = route.visits[k].start;
    if (k == 0 && z < tech.window.start + inst.depot_to_task(t, idx[k])) {
      add("departure", k, "start before technician can arrive from depot");
    }
    if (k > 0) {
      const auto& prev = inst.tasks[idx[k - 1]];
      if (route.visits[k - 1].start + prev.duration + inst.task_travel(idx[k - 1], idx[k]) > z) {
        add("chaining", k, "start before predecessor '" + prev.id + "' is finished and travelled");
      }
    }
    if (z < task.window.start || z > task.window.end - task.duration) {
      add("task_window", k, "start outside task window");
    }
    if (z < tech.window.start) add("tech_window", k, "start before technician window");
    if (z > tech.window.end - task.duration - inst.task_to_depot(idx[k], t)) {
      add("return", k, "cannot finish and return to depot within technician window");
    }
    if (!is_subset(task.required_skills, tech.skills)) add("skills", k, "missing required skill");
  }
  return out;
}

Minutes route_travel(const Route& route, const Instance& inst) {
  if (route.visits.empty()) return 0;
  const int t = inst.daily_index(route.technician);
  Minutes total = 0;
  int prev = inst.dailies[t].depot;
  for (const auto& v : route.visits) {
    const int loc = inst.tasks[inst.task_index(v.task)].location;
    total += inst.travel(prev, loc);
    prev = loc;
  }
  return total + inst.travel(prev, inst.dailies[t].depot);
}

namespace {

void check_coverage(const Solution& sol, const Instance& inst) {
  std::vector<int> seen(inst.tasks.size(), 0);
  auto mark = [&](const std::string& id) { ++seen[inst.task_index(id)]; };
  for (const auto& r : sol.routes) {
    for (const auto& v : r.visits) mark(v.task);
  }
  for (const auto& id : sol.unserved) mark(id);
  for (const auto& id : sol.digitized) mark(id);
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i] != 1) {
      throw InputError("solution covers task '" + inst.tasks[i].id + "' " +
                       std::to_string(seen[i]) + " times");
    }
  }
}

}  // namespace

Minutes solution_penalty(const Solution& sol, const Instance& inst) {
  Minutes total = 0;
  for (const auto& id : sol.unserved) total += inst.tasks[inst.task_index(id)].penalty;
  return total;
}

Minutes solution_objective(const Solution& sol, const Instance& inst) {
  check_coverage(sol, inst);
  Minutes total = solution_penalty(sol, inst);
  for (const auto& r : sol.routes) total += route_travel(r, inst);
  return total;
}

std::optional<Schedule> schedule_sequence(const Instance& inst, int daily,
                                          std::span<const int> tasks) {
  const auto& tech = inst.dailies[daily];
  Schedule s;
  s.starts.reserve(tasks.size());
  Minutes time = tech.window.start;
  int prev_loc = tech.depot;
  for (int i : tasks) {
    const auto& task = inst.tasks[i];
    const Minutes leg = inst.travel(prev_loc, task.location);
    const Minutes start = std::max(time + leg, task.window.start);
    if (start > task.window.end - task.duration) return std::nullopt;
    if (start + task.duration + inst.travel(task.location, tech.depot) > tech.window.end) {
      return std::nullopt;
    }
    s.travel += leg;
    s.starts.push_back(start);
    time = start + task.duration;
    prev_loc = task.location;
  }
  if (!tasks.empty()) s.travel += inst.travel(prev_loc, tech.depot);
  return s;
}

Route make_route(const Instance& inst, int daily, std::span<const int> tasks) {
  auto sched = schedule_sequence(inst, daily, tasks);
  if (!sched) {
    throw InternalError("infeasible task sequence for daily technician '" +
                        inst.dailies[daily].id + "'");
  }
  Route r;
  r.technician = inst.dailies[daily].id;
  r.travel_cost = sched->travel;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    r.visits.push_back({inst.tasks[tasks[k]].id, sched->starts[k]});
  }
  return r;
}

std::vector<int> routing_dailies(const Instance& inst) {
  std::vector<int> out;
  for (int t = 0; t < static_cast<int>(inst.dailies.size()); ++t) {
    if (!inst.dailies[t].is_new) out.push_back(t);
  }
  return out;
}

}  // namespace trsp
