#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "trsp/core.hpp"
#include "trsp/io.hpp"

namespace trsp::testing {

inline Task make_task(std::string id, int location, SkillSet skills, Minutes penalty,
                      TimeWindow window = {540, 1020}, Minutes duration = 30) {
  Task t;
  t.id = std::move(id);
  t.location = location;
  t.required_skills = std::move(skills);
  t.penalty = penalty;
  t.window = window;
  t.duration = duration;
  return t;
}

inline MasterTechnician make_master(std::string id, int location, SkillSet skills,
                                    TimeWindow window = {540, 1020}) {
  MasterTechnician m;
  m.id = std::move(id);
  m.location = location;
  m.skills = std::move(skills);
  m.shifts = {{0, window}};
  return m;
}

/// Instance over an explicit matrix; skills are named s0, s1, ...
inline Instance make_instance(std::vector<Task> tasks, std::vector<MasterTechnician> masters,
                              const std::vector<std::vector<Minutes>>& c, int n_skills = 3) {
  Instance inst;
  inst.name = "fixture";
  for (int s = 0; s < n_skills; ++s) inst.skills.push_back("s" + std::to_string(s));
  inst.tasks = std::move(tasks);
  inst.masters = std::move(masters);
  const int n = static_cast<int>(c.size());
  inst.travel = TravelMatrix(n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) inst.travel.set(a, b, c[a][b]);
  }
  inst.explicit_travel = true;
  inst.rebuild_dailies();
  validate_instance(inst);
  return inst;
}

/// Catalog with no investments on offer; tests switch on what they need.
inline InvestmentCatalog empty_catalog() {
  InvestmentCatalog cat;
  cat.overtime_minutes = 0;
  return cat;
}

inline InvestmentCatalog zero_budget(InvestmentCatalog cat) {
  cat.budgets.overtime = 0;
  cat.budgets.digitization = 0;
  cat.budgets.skill = 0;
  cat.budgets.new_tech = 0;
  return cat;
}

struct InvestCase {
  Instance instance;
  InvestmentCatalog catalog;
};

/// Three tasks and one technician short of skills and hours, with every kind
/// of investment on offer. Small enough for exhaustive enumeration of the
/// monolithic investment model in most seeds.
inline InvestCase tiny_invest_case(std::uint64_t seed, int n_tasks = 3) {
  std::mt19937_64 rng(seed);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::vector<std::pair<int, int>> pts;
  for (int i = 0; i <= n_tasks; ++i) pts.push_back({uni(0, 30), uni(0, 30)});
  std::vector<std::vector<Minutes>> c(pts.size(), std::vector<Minutes>(pts.size(), 0));
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = 0; b < pts.size(); ++b) {
      c[a][b] = euclidean_minutes(pts[a].first, pts[a].second, pts[b].first, pts[b].second);
    }
  }
  std::vector<Task> tasks;
  for (int i = 0; i < n_tasks; ++i) {
    const int start = uni(0, 1) ? 540 : uni(900, 1000);
    const int span = uni(90, 200);
    auto t = make_task("t" + std::to_string(i), i, {uni(0, 1)}, uni(100, 3000), {start, start + span},
                       uni(30, std::min(150, span)));
    t.digitizable = i == 0;
    tasks.push_back(t);
  }
  const int depot = n_tasks;
  Instance inst = make_instance(tasks, {make_master("m0", depot, {0}, {540, 900})}, c, 2);
  InvestCase out{inst, InvestmentCatalog{}};
  auto& cat = out.catalog;
  cat.overtime_minutes = 120;
  cat.overtime_cost = 450;
  cat.skill_bundles = {{"b0", {0}, 35}, {"b1", {1}, 35}};
  cat.digitization_cost = {{"t0", 500 * uni(1, 5)}};
  auto cand = make_master("m0+new", depot, {uni(0, 1)}, {540, 900});
  cand.is_new_candidate = true;
  cat.new_tech_candidates = {cand};
  cat.new_tech_cost = {1200};
  return out;
}

}  // namespace trsp::testing
