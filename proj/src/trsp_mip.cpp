#include "trsp/trsp_mip.hpp"

#include "trsp/alns.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace trsp {

std::optional<TimeWindow> start_range(const Instance& inst, int daily, int task) {
  const auto& tech = inst.dailies[daily];
  const auto& t = inst.tasks[task];
  const Minutes lo = std::max(t.window.start, tech.window.start + inst.depot_to_task(daily, task));
  const Minutes hi = std::min(t.window.end - t.duration,
                              tech.window.end - t.duration - inst.task_to_depot(task, daily));
  if (lo > hi) return std::nullopt;
  return TimeWindow{lo, hi};
}

TrspModel build_trsp(const Instance& inst) {
  TrspModel out;
  auto& m = out.model;
  const int n_tasks = static_cast<int>(inst.tasks.size());
  out.y.assign(n_tasks, -1);
  for (int i = 0; i < n_tasks; ++i) {
    if (inst.tasks[i].digitized) continue;
    out.y[i] = m.add_continuous("y_" + inst.tasks[i].id, 0.0, lp::kInf,
                                static_cast<double>(inst.tasks[i].penalty));
  }

  for (int t : routing_dailies(inst)) {
    TrspTech tech;
    tech.daily = t;
    for (int i : eligible_tasks(t, inst)) {
      if (auto r = start_range(inst, t, i)) {
        tech.tasks.push_back(i);
        tech.start_bounds[i] = *r;
      }
    }
    const std::string& tid = inst.dailies[t].id;
    std::vector<int> nodes = tech.tasks;
    nodes.insert(nodes.begin(), kDepotNode);
    auto travel = [&](int a, int b) {
      if (a == kDepotNode) return inst.depot_to_task(t, b);
      if (b == kDepotNode) return inst.task_to_depot(a, t);
      return inst.task_travel(a, b);
    };
    auto node_name = [&](int a) { return a == kDepotNode ? std::string("depot") : inst.tasks[a].id; };
    for (int a : nodes) {
      for (int b : nodes) {
        if (a == b) continue;
        tech.arc[{a, b}] = m.add_binary("x_" + tid + "_" + node_name(a) + "_" + node_name(b),
                                        static_cast<double>(travel(a, b)));
      }
    }
    for (int i : tech.tasks) {
      const auto& r = tech.start_bounds[i];
      tech.z[i] = m.add_continuous("z_" + tid + "_" + inst.tasks[i].id, static_cast<double>(r.start),
                                   static_cast<double>(r.end), 0.0);
    }

    lp::Terms leave;
    for (int j : tech.tasks) leave.push_back({tech.arc.at({kDepotNode, j}), 1.0});
    if (!leave.empty()) m.add_constraint("depart_" + tid, leave, lp::Sense::le, 1.0);
    for (int a : nodes) {
      lp::Terms flow;
      for (int b : nodes) {
        if (a == b) continue;
        flow.push_back({tech.arc.at({b, a}), 1.0});
        flow.push_back({tech.arc.at({a, b}), -1.0});
      }
      if (!flow.empty()) m.add_constraint("flow_" + tid + "_" + node_name(a), flow, lp::Sense::eq, 0.0);
    }
    for (int i : tech.tasks) {
      for (int j : tech.tasks) {
        if (i == j) continue;
        const Minutes f = inst.tasks[i].duration;
        const double big_m = std::max<double>(
            0.0, static_cast<double>(tech.start_bounds[i].end + f + travel(i, j) - tech.start_bounds[j].start));
        const int x = tech.arc.at({i, j});
        // z_j >= z_i + f_i + c_ij - M (1 - x_ij)
        m.add_constraint("time_" + tid + "_" + inst.tasks[i].id + "_" + inst.tasks[j].id,
                         {{tech.z[j], 1.0}, {tech.z[i], -1.0}, {x, -big_m}}, lp::Sense::ge,
                         static_cast<double>(f + travel(i, j)) - big_m);
        out.big_m[{x, static_cast<int>(out.techs.size())}] = big_m;
      }
    }
    out.techs.push_back(std::move(tech));
  }

  for (int i = 0; i < n_tasks; ++i) {
    if (out.y[i] < 0) continue;
    lp::Terms in;
    for (const auto& tech : out.techs) {
      if (!tech.z.count(i)) continue;
      for (const auto& [arc, var] : tech.arc) {
        if (arc.second == i) in.push_back({var, 1.0});
      }
    }
    lp::Terms cover = in;
    cover.push_back({out.y[i], 1.0});
    m.add_constraint("cover_" + inst.tasks[i].id, cover, lp::Sense::ge, 1.0);
    if (in.size() > 1) m.add_constraint("once_" + inst.tasks[i].id, in, lp::Sense::le, 1.0);
  }
  return out;
}

std::vector<double> trsp_point(const TrspModel& tm, const Instance& inst, const Solution& sol) {
  std::vector<double> v(tm.model.num_variables(), 0.0);
  for (const auto& tech : tm.techs) {
    for (const auto& [task, var] : tech.z) v[var] = static_cast<double>(tech.start_bounds.at(task).start);
  }
  for (int i = 0; i < static_cast<int>(inst.tasks.size()); ++i) {
    if (tm.y[i] >= 0) v[tm.y[i]] = 1.0;
  }
  for (const auto& r : sol.routes) {
    const int t = inst.daily_index(r.technician);
    const auto it = std::find_if(tm.techs.begin(), tm.techs.end(), [&](const TrspTech& x) { return x.daily == t; });
    if (it == tm.techs.end()) throw InputError("route for unknown technician '" + r.technician + "'");
    int prev = kDepotNode;
    for (const auto& visit : r.visits) {
      const int i = inst.task_index(visit.task);
      auto arc = it->arc.find({prev, i});
      if (arc == it->arc.end()) throw InputError("task '" + visit.task + "' outside V(" + r.technician + ")");
      v[arc->second] = 1.0;
      v[it->z.at(i)] = static_cast<double>(visit.start);
      v[tm.y[i]] = 0.0;
      prev = i;
    }
    if (prev != kDepotNode) v[it->arc.at({prev, kDepotNode})] = 1.0;
  }
  return v;
}

Solution extract_trsp(const TrspModel& tm, const Instance& inst, const std::vector<double>& values) {
  Solution sol;
  std::vector<char> served(inst.tasks.size(), 0);
  for (const auto& tech : tm.techs) {
    std::vector<int> seq;
    int cur = kDepotNode;
    for (std::size_t guard = 0; guard <= tech.tasks.size(); ++guard) {
      int next = kDepotNode;
      for (const auto& [arc, var] : tech.arc) {
        if (arc.first == cur && values[var] > 0.5) {
          next = arc.second;
          break;
        }
      }
      if (next == kDepotNode) break;
      seq.push_back(next);
      cur = next;
    }
    if (seq.empty()) continue;
    for (int i : seq) served[i] = 1;
    sol.routes.push_back(make_route(inst, tech.daily, seq));
  }
  for (int i = 0; i < static_cast<int>(inst.tasks.size()); ++i) {
    if (inst.tasks[i].digitized) {
      sol.digitized.push_back(inst.tasks[i].id);
    } else if (!served[i]) {
      sol.unserved.push_back(inst.tasks[i].id);
    }
  }
  sol.objective = solution_objective(sol, inst);
  return sol;
}

TrspResult solve_trsp(const Instance& inst, const TrspOptions& opt) {
  const auto dailies = routing_dailies(inst);
  if (inst.tasks.size() > 20 || dailies.size() > 3) {
    std::cerr << "warning: exact model on " << inst.tasks.size() << " tasks x " << dailies.size()
              << " technicians may not finish with the built-in solver\n";
  }
  const auto tm = build_trsp(inst);
  lp::MipOptions mo;
  mo.time_limit_seconds = opt.time_limit_seconds;
  if (opt.use_heuristic_incumbent) mo.incumbent = trsp_point(tm, inst, initial_greedy(inst));
  const auto mip = lp::solve_mip(tm.model, mo);
  if (mip.values.empty()) {
    throw InternalError(std::string("exact model returned no solution (status ") + lp::to_string(mip.status) + ")");
  }
  TrspResult res;
  res.solution = extract_trsp(tm, inst, mip.values);
  res.status = mip.status;
  res.bound = mip.bound;
  res.gap = mip.gap;
  res.nodes = mip.nodes;
  if (std::abs(static_cast<double>(res.solution.objective) - mip.objective) > 1e-6) {
    throw InternalError("extracted objective " + std::to_string(res.solution.objective) +
                        " differs from model objective " + std::to_string(mip.objective));
  }
  return res;
}

}  // namespace trsp
