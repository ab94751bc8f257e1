#include "trsp/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <stdexcept>

namespace trsp {

namespace {

bool is_on(const std::vector<double>& values, int var, const char* what) {
  const double v = values.at(var);
  if (v > 1e-6 && v < 1.0 - 1e-6) {
    throw InternalError(std::string("fractional investment ") + what + " = " + std::to_string(v));
  }
  return v > 0.5;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (std::uint64_t{words[0]} << 32) | words[1];
}

// Routes of `sol` re-read on `inst`: tasks digitized there leave their route,
// and a route that no longer schedules is dropped to unserved.
Solution carry_over(const Solution& sol, const Instance& inst) {
  Solution out;
  for (const auto& route : sol.routes) {
    const int t = inst.daily_index(route.technician);
    std::vector<int> seq;
    for (const auto& v : route.visits) {
      const int i = inst.task_index(v.task);
      if (!inst.tasks[i].digitized) seq.push_back(i);
    }
    if (seq.empty()) continue;
    if (schedule_sequence(inst, t, seq)) {
      out.routes.push_back(make_route(inst, t, seq));
    } else {
      for (int i : seq) out.unserved.push_back(inst.tasks[i].id);
    }
  }
  std::vector<char> placed(inst.tasks.size(), 0);
  for (const auto& r : out.routes) {
    for (const auto& v : r.visits) placed[inst.task_index(v.task)] = 1;
  }
  for (const auto& id : out.unserved) placed[inst.task_index(id)] = 1;
  for (std::size_t i = 0; i < inst.tasks.size(); ++i) {
    if (placed[i]) continue;
    (inst.tasks[i].digitized ? out.digitized : out.unserved).push_back(inst.tasks[i].id);
  }
  out.objective = solution_objective(out, inst);
  return out;
}

Solution plan(const Instance& inst, const PipelineConfig& cfg, std::uint64_t seed, const Solution* fallback) {
  AlnsConfig ac = cfg.alns;
  ac.seed = seed;
  const auto res = run_alns(inst, ac);
  Solution best = res.best;
  if (fallback && fallback->objective < best.objective) best = *fallback;
  if (cfg.setcover) best = setcover_finalize(res.pool, inst, best, cfg.setcover_seconds);
  return best;
}

}  // namespace

InvestmentDecision extract_investments(const Master& ms, const ColgenProblem& p, const std::vector<double>& values) {
  const Instance& inst = p.instance;
  InvestmentDecision d;
  for (const auto& [t, var] : ms.u_ot) {
    if (is_on(values, var, "overtime")) d.overtime_dailies.insert(inst.dailies[t].id);
  }
  for (const auto& [i, var] : ms.u_dig) {
    if (is_on(values, var, "digitization")) d.digitized_tasks.insert(inst.tasks[i].id);
  }
  for (const auto& [key, var] : ms.u_skill) {
    if (is_on(values, var, "skill upgrade")) d.skill_upgrades.insert({inst.masters[key.first].id, key.second});
  }
  for (const auto& [mi, var] : ms.u_nt) {
    if (is_on(values, var, "new technician")) d.new_masters.insert(inst.masters[mi].id);
  }
  return d;
}

Instance apply_investments(const Instance& instance, const InvestmentDecision& d, const InvestmentCatalog& cat) {
  if (d.empty()) return instance;
  Instance out = instance;
  for (const auto& id : d.new_masters) {
    const auto it = std::find_if(cat.new_tech_candidates.begin(), cat.new_tech_candidates.end(),
                                 [&](const MasterTechnician& m) { return m.id == id; });
    if (it == cat.new_tech_candidates.end()) throw InputError("decision hires unknown candidate '" + id + "'");
    const bool present = std::any_of(out.masters.begin(), out.masters.end(),
                                     [&](const MasterTechnician& m) { return m.id == id; });
    if (present) continue;
    MasterTechnician m = *it;
    m.is_new_candidate = false;
    out.masters.push_back(std::move(m));
  }
  for (const auto& [master, bundle] : d.skill_upgrades) {
    if (bundle < 0 || bundle >= static_cast<int>(cat.skill_bundles.size())) {
      throw InputError("decision upgrades unknown bundle " + std::to_string(bundle));
    }
    auto& skills = out.masters.at(out.master_index(master)).skills;
    const auto& add = cat.skill_bundles[bundle].skills;
    skills.insert(skills.end(), add.begin(), add.end());
    skills = normalized(std::move(skills));
  }
  for (const auto& id : d.digitized_tasks) {
    if (!cat.digitization_cost.count(id)) throw InputError("task '" + id + "' is not digitizable");
    auto& task = out.tasks.at(out.task_index(id));
    task.digitizable = true;
    task.digitized = true;
  }
  out.rebuild_dailies();
  for (const auto& id : d.overtime_dailies) {
    out.daily_index(id);
    Minutes& extra = out.overtime[id];
    extra = std::max(extra, cat.overtime_minutes);
  }
  out.rebuild_dailies();
  validate_instance(out);
  return out;
}

Capex capex_breakdown(const InvestmentDecision& d, const InvestmentCatalog& cat) {
  Capex c;
  c.overtime = static_cast<Minutes>(d.overtime_dailies.size()) * cat.overtime_cost;
  for (const auto& id : d.digitized_tasks) {
    const auto it = cat.digitization_cost.find(id);
    if (it == cat.digitization_cost.end()) throw InputError("task '" + id + "' is not digitizable");
    c.digitization += it->second;
  }
  for (const auto& [master, bundle] : d.skill_upgrades) c.skill += cat.skill_bundles.at(bundle).cost;
  for (const auto& id : d.new_masters) {
    bool found = false;
    for (std::size_t k = 0; k < cat.new_tech_candidates.size(); ++k) {
      if (cat.new_tech_candidates[k].id != id) continue;
      c.new_tech += cat.new_tech_cost.at(k);
      found = true;
    }
    if (!found) throw InputError("decision hires unknown candidate '" + id + "'");
  }
  return c;
}

Minutes capex(const InvestmentDecision& d, const InvestmentCatalog& cat) { return capex_breakdown(d, cat).total(); }

PipelineResult run_pipeline(const Instance& instance, const InvestmentCatalog& catalog, const PipelineConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  auto seconds_since = [](Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); };
  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const InputError& e) {
      throw InputError(std::string(name) + ": " + e.what());
    } catch (const std::exception& e) {
      throw InternalError(std::string(name) + ": " + e.what());
    }
  };

  PipelineResult r;
  r.seed_noinv = derive_seed(cfg.seed, 1);
  r.seed_inv = derive_seed(cfg.seed, 2);
  double alns_seconds = 0.0;

  auto t0 = Clock::now();
  r.noinv = stage("alns without investments", [&] { return plan(instance, cfg, r.seed_noinv, nullptr); });
  alns_seconds += seconds_since(t0);

  t0 = Clock::now();
  const auto cg = stage("column generation", [&] {
    return run_colgen(instance, catalog, cfg.colgen, cfg.warmstart ? &r.noinv : nullptr);
  });
  const double assm_seconds = seconds_since(t0);
  r.decision = stage("investment extraction", [&] { return extract_investments(cg.master, cg.problem, cg.mip.values); });
  r.lp_trace = cg.trace;
  r.invested = stage("applying investments", [&] { return apply_investments(instance, r.decision, catalog); });

  t0 = Clock::now();
  r.inv = stage("alns with investments", [&] {
    const Solution carried = carry_over(r.noinv, r.invested);
    return plan(r.invested, cfg, r.seed_inv, &carried);
  });
  alns_seconds += seconds_since(t0);

  const Capex c = capex_breakdown(r.decision, catalog);
  auto& row = r.row;
  row.instance_id = instance.name;
  row.obj_noinv = r.noinv.objective;
  row.obj_inv = r.inv.objective;
  row.capex_ot = c.overtime;
  row.capex_dig = c.digitization;
  row.capex_skill = c.skill;
  row.capex_nt = c.new_tech;
  row.capex_total = c.total();
  row.business_case = business_case(row.obj_noinv, row.obj_inv, row.capex_total);
  row.unserved_noinv = static_cast<int>(r.noinv.unserved.size());
  row.unserved_inv = static_cast<int>(r.inv.unserved.size());
  row.travel_noinv = r.noinv.objective - solution_penalty(r.noinv, instance);
  row.travel_inv = r.inv.objective - solution_penalty(r.inv, r.invested);
  row.cg_iters = cg.iterations;
  row.cg_optimal = cg.cg_optimal;
  row.seconds_assm = cfg.record_seconds ? assm_seconds : 0.0;
  row.seconds_alns = cfg.record_seconds ? alns_seconds : 0.0;
  return r;
}

Report run_pipeline(const std::vector<Instance>& instances, const std::vector<InvestmentCatalog>& catalogs,
                    const PipelineConfig& cfg) {
  if (instances.size() != catalogs.size()) throw InputError("one catalog per instance is required");
  Report report;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    PipelineConfig c = cfg;
    c.seed = derive_seed(cfg.seed, static_cast<std::uint32_t>(100 + k));
    report.rows.push_back(run_pipeline(instances[k], catalogs[k], c).row);
  }
  return report;
}

}  // namespace trsp
