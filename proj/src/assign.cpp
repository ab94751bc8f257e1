#include "trsp/assign.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace trsp {

namespace {

Minutes symmetric_travel(const Instance& inst, int i, int j) {
  return std::max(inst.task_travel(i, j), inst.task_travel(j, i));
}

int bundle_of(const InvestmentCatalog& cat, SkillId s) {
  for (std::size_t b = 0; b < cat.skill_bundles.size(); ++b) {
    const auto& skills = cat.skill_bundles[b].skills;
    if (std::binary_search(skills.begin(), skills.end(), s)) return static_cast<int>(b);
  }
  return -1;
}

}  // namespace

std::vector<TechOptions> investment_options(const Instance& inst, const InvestmentCatalog* cat) {
  std::vector<TechOptions> out;
  for (int t = 0; t < static_cast<int>(inst.dailies.size()); ++t) {
    const auto& tech = inst.dailies[t];
    TechOptions to;
    to.daily = t;
    if (!cat) {
      if (!tech.is_new) {
        for (int i : eligible_tasks(t, inst)) to.options.push_back({i, false, {}});
      }
      out.push_back(std::move(to));
      continue;
    }
    const EligibilityOptions relaxed{true, cat->overtime_minutes};
    Minutes load = 0;
    for (int i : eligible_tasks(t, inst, relaxed)) {
      const auto& task = inst.tasks[i];
      TaskOption opt{i, !tw_feasible(task, tech, 0).has_value(), {}};
      bool ok = true;
      for (SkillId s : task.required_skills) {
        if (std::binary_search(tech.skills.begin(), tech.skills.end(), s)) continue;
        const int b = bundle_of(*cat, s);
        if (b < 0) {
          ok = false;
          break;
        }
        opt.bundles.push_back(b);
      }
      if (!ok) continue;
      std::sort(opt.bundles.begin(), opt.bundles.end());
      opt.bundles.erase(std::unique(opt.bundles.begin(), opt.bundles.end()), opt.bundles.end());
      to.bundles.insert(to.bundles.end(), opt.bundles.begin(), opt.bundles.end());
      load += task.duration + inst.depot_to_task(t, i);
      if (opt.needs_overtime) to.overtime_available = true;
      to.options.push_back(std::move(opt));
    }
    if (cat->overtime_minutes > 0 && load > tech.capacity) to.overtime_available = true;
    std::sort(to.bundles.begin(), to.bundles.end());
    to.bundles.erase(std::unique(to.bundles.begin(), to.bundles.end()), to.bundles.end());
    out.push_back(std::move(to));
  }
  return out;
}

double estimated_travel(const Instance& inst, int daily, const std::vector<int>& tasks, double k) {
  Minutes longest = 0;
  for (std::size_t a = 0; a < tasks.size(); ++a) {
    longest = std::max(longest, inst.depot_to_task(daily, tasks[a]));
    for (std::size_t b = a + 1; b < tasks.size(); ++b) {
      longest = std::max(longest, symmetric_travel(inst, tasks[a], tasks[b]));
    }
  }
  return k * static_cast<double>(longest);
}

namespace {

AssignModel build(const Instance& base, const InvestmentCatalog* cat, double k) {
  if (k < 0) throw InputError("travel scale k must be nonnegative");
  AssignModel am;
  am.instance = cat ? with_candidates(base, *cat) : base;
  am.k = k;
  am.invest = cat != nullptr;
  const Instance& inst = am.instance;
  auto& m = am.model;
  am.techs = investment_options(inst, cat);

  const int n = static_cast<int>(inst.tasks.size());
  am.y.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (inst.tasks[i].digitized) continue;
    am.y[i] = m.add_continuous("y[" + inst.tasks[i].id + "]", 0.0, lp::kInf,
                               static_cast<double>(inst.tasks[i].penalty));
  }

  if (cat) {
    for (int i = 0; i < n; ++i) {
      const auto it = cat->digitization_cost.find(inst.tasks[i].id);
      if (it == cat->digitization_cost.end() || inst.tasks[i].digitized) continue;
      am.u_dig[i] = m.add_binary("udig[" + inst.tasks[i].id + "]", static_cast<double>(it->second));
    }
    for (std::size_t c = 0; c < cat->new_tech_candidates.size(); ++c) {
      const int mi = inst.master_index(cat->new_tech_candidates[c].id);
      const bool usable = std::any_of(am.techs.begin(), am.techs.end(), [&](const TechOptions& to) {
        return inst.dailies[to.daily].master == mi && !to.options.empty();
      });
      if (usable) {
        am.u_nt[mi] = m.add_binary("unt[" + inst.masters[mi].id + "]",
                                   static_cast<double>(cat->new_tech_cost[c]));
      }
    }
  }

  for (const auto& to : am.techs) {
    const int t = to.daily;
    if (to.options.empty()) continue;
    const auto& tech = inst.dailies[t];
    const std::string& tid = tech.id;
    am.zhat[t] = m.add_continuous("zhat[" + tid + "]", 0.0, lp::kInf, 1.0);
    int uot = -1;
    if (cat && to.overtime_available) {
      uot = m.add_binary("uot[" + tid + "]", static_cast<double>(cat->overtime_cost));
      am.u_ot[t] = uot;
    }
    for (int b : to.bundles) {
      const std::pair<int, int> key{tech.master, b};
      if (!am.u_skill.count(key)) {
        am.u_skill[key] = m.add_binary("uskill[" + inst.masters[tech.master].id + "," +
                                           std::to_string(b) + "]",
                                       static_cast<double>(cat->skill_bundles[b].cost));
      }
    }
    for (const auto& opt : to.options) {
      am.x[{t, opt.task}] = m.add_binary("x[" + tid + "," + inst.tasks[opt.task].id + "]", 0.0);
    }
    const int z = am.zhat[t];
    const auto& opts = to.options;
    for (std::size_t a = 0; a < opts.size(); ++a) {
      const int i = opts[a].task;
      const int xi = am.x[{t, i}];
      const double cd = k * static_cast<double>(inst.depot_to_task(t, i));
      if (cd > 0) m.add_constraint("dep[" + tid + "," + inst.tasks[i].id + "]", {{z, 1.0}, {xi, -cd}},
                                   lp::Sense::ge, 0.0);
      for (std::size_t b = a + 1; b < opts.size(); ++b) {
        const int j = opts[b].task;
        const int xj = am.x[{t, j}];
        const std::string pair = tid + "," + inst.tasks[i].id + "," + inst.tasks[j].id;
        const double c = k * static_cast<double>(symmetric_travel(inst, i, j));
        if (c > 0) m.add_constraint("pair[" + pair + "]", {{z, 1.0}, {xi, -c}, {xj, -c}}, lp::Sense::ge, -c);
        if (overlap(inst.tasks[i], inst.tasks[j])) {
          m.add_constraint("ovl[" + pair + "]", {{xi, 1.0}, {xj, 1.0}}, lp::Sense::le, 1.0);
        }
      }
    }
    lp::Terms cap;
    for (const auto& opt : opts) {
      const auto& task = inst.tasks[opt.task];
      cap.push_back({am.x[{t, opt.task}], static_cast<double>(task.duration + inst.depot_to_task(t, opt.task))});
    }
    if (uot >= 0) cap.push_back({uot, -static_cast<double>(cat->overtime_minutes)});
    m.add_constraint("cap[" + tid + "]", std::move(cap), lp::Sense::le, static_cast<double>(tech.capacity));

    for (const auto& opt : opts) {
      const int xi = am.x[{t, opt.task}];
      const std::string suffix = tid + "," + inst.tasks[opt.task].id + "]";
      if (opt.needs_overtime) {
        m.add_constraint("got[" + suffix, {{xi, 1.0}, {uot, -1.0}}, lp::Sense::le, 0.0);
      }
      for (int b : opt.bundles) {
        m.add_constraint("gsk" + std::to_string(b) + "[" + suffix,
                         {{xi, 1.0}, {am.u_skill.at({tech.master, b}), -1.0}}, lp::Sense::le, 0.0);
      }
      if (tech.is_new) {
        m.add_constraint("gnt[" + suffix, {{xi, 1.0}, {am.u_nt.at(tech.master), -1.0}}, lp::Sense::le, 0.0);
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    if (am.y[i] < 0) continue;
    lp::Terms row{{am.y[i], 1.0}};
    for (const auto& to : am.techs) {
      const auto it = am.x.find({to.daily, i});
      if (it != am.x.end()) row.push_back({it->second, 1.0});
    }
    if (const auto d = am.u_dig.find(i); d != am.u_dig.end()) row.push_back({d->second, 1.0});
    m.add_constraint("cover[" + inst.tasks[i].id + "]", std::move(row), lp::Sense::ge, 1.0);
  }

  if (cat) {
    auto budget = [&](const char* name, const auto& vars, const std::optional<int>& limit) {
      if (!limit) return;
      lp::Terms row;
      for (const auto& [key, var] : vars) row.push_back({var, 1.0});
      if (!row.empty()) m.add_constraint(name, std::move(row), lp::Sense::le, *limit);
    };
    budget("budget_ot", am.u_ot, cat->budgets.overtime);
    budget("budget_dig", am.u_dig, cat->budgets.digitization);
    budget("budget_skill", am.u_skill, cat->budgets.skill);
    budget("budget_nt", am.u_nt, cat->budgets.new_tech);
  }
  return am;
}

bool on(const std::vector<double>& values, int var) {
  const double v = values[var];
  if (v > 1e-6 && v < 1.0 - 1e-6) {
    throw InternalError("fractional binary value " + std::to_string(v) + " in assignment");
  }
  return v > 0.5;
}

}  // namespace

AssignModel build_assignment(const Instance& instance, double k) { return build(instance, nullptr, k); }

AssignModel build_assignment_invest(const Instance& instance, const InvestmentCatalog& catalog,
                                    double k) {
  return build(instance, &catalog, k);
}

Assignment extract_assignment(const AssignModel& am, const std::vector<double>& values) {
  const Instance& inst = am.instance;
  Assignment out;
  std::vector<char> covered(inst.tasks.size(), 0);
  for (const auto& [key, var] : am.x) {
    if (!on(values, var)) continue;
    out.tasks[key.first].push_back(key.second);
    covered[key.second] = 1;
  }
  for (auto& [t, tasks] : out.tasks) std::sort(tasks.begin(), tasks.end());
  for (const auto& [t, var] : am.u_ot) {
    if (on(values, var)) out.decision.overtime_dailies.insert(inst.dailies[t].id);
  }
  for (const auto& [i, var] : am.u_dig) {
    if (!on(values, var)) continue;
    out.decision.digitized_tasks.insert(inst.tasks[i].id);
    covered[i] = 1;
  }
  for (const auto& [key, var] : am.u_skill) {
    if (on(values, var)) out.decision.skill_upgrades.insert({inst.masters[key.first].id, key.second});
  }
  for (const auto& [mi, var] : am.u_nt) {
    if (on(values, var)) out.decision.new_masters.insert(inst.masters[mi].id);
  }
  for (int i = 0; i < static_cast<int>(inst.tasks.size()); ++i) {
    if (!covered[i] && !inst.tasks[i].digitized) out.unserved.push_back(i);
  }
  out.objective = am.model.objective_value(values);
  return out;
}

Assignment solve_assignment(const AssignModel& am, const lp::MipOptions& options) {
  const auto mip = lp::solve_mip(am.model, options);
  if (mip.values.empty()) {
    throw InternalError(std::string("assignment model has no solution: ") + lp::to_string(mip.status));
  }
  Assignment out = extract_assignment(am, mip.values);
  out.objective = mip.objective;
  out.status = mip.status;
  out.gap = mip.gap;
  return out;
}

}  // namespace trsp
