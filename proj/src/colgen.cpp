#include "trsp/colgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>

namespace trsp {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

const TaskOption* find_option(const TechOptions& to, int task) {
  for (const auto& o : to.options) {
    if (o.task == task) return &o;
  }
  return nullptr;
}

Minutes load_of(const Instance& inst, int daily, const std::vector<int>& tasks) {
  Minutes load = 0;
  for (int i : tasks) load += inst.tasks[i].duration + inst.depot_to_task(daily, i);
  return load;
}

double at(const std::vector<double>& v, int i) {
  return i >= 0 && i < static_cast<int>(v.size()) ? v[i] : 0.0;
}

}  // namespace

ColgenProblem make_problem(const Instance& instance, const InvestmentCatalog& catalog, double k) {
  if (k < 0) throw InputError("travel scale k must be nonnegative");
  ColgenProblem p;
  p.instance = with_candidates(instance, catalog);
  p.catalog = catalog;
  p.techs = investment_options(p.instance, &catalog);
  p.k = k;
  return p;
}

std::optional<Column> make_column(const ColgenProblem& p, int daily, std::vector<int> tasks) {
  const Instance& inst = p.instance;
  if (daily < 0 || daily >= static_cast<int>(inst.dailies.size())) {
    throw InputError("column references unknown technician index " + std::to_string(daily));
  }
  std::sort(tasks.begin(), tasks.end());
  tasks.erase(std::unique(tasks.begin(), tasks.end()), tasks.end());
  Column col;
  col.daily = daily;
  const auto& to = p.techs[daily];
  for (int i : tasks) {
    const TaskOption* o = find_option(to, i);
    if (!o) return std::nullopt;
    col.overtime = col.overtime || o->needs_overtime;
    col.bundles.insert(col.bundles.end(), o->bundles.begin(), o->bundles.end());
  }
  std::sort(col.bundles.begin(), col.bundles.end());
  col.bundles.erase(std::unique(col.bundles.begin(), col.bundles.end()), col.bundles.end());
  for (std::size_t a = 0; a < tasks.size(); ++a) {
    for (std::size_t b = a + 1; b < tasks.size(); ++b) {
      if (overlap(inst.tasks[tasks[a]], inst.tasks[tasks[b]])) return std::nullopt;
    }
  }
  const Minutes load = load_of(inst, daily, tasks);
  const Minutes cap = inst.dailies[daily].capacity;
  if (load > cap) {
    if (!to.overtime_available || load > cap + p.catalog.overtime_minutes) return std::nullopt;
    col.overtime = true;
  }
  col.cost = estimated_travel(inst, daily, tasks, p.k);
  col.tasks = std::move(tasks);
  return col;
}

std::vector<Column> initial_columns(const ColgenProblem& p) {
  const Instance& inst = p.instance;
  std::vector<int> order;
  for (int i = 0; i < static_cast<int>(inst.tasks.size()); ++i) {
    if (!inst.tasks[i].digitized) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return inst.tasks[a].penalty > inst.tasks[b].penalty; });
  std::vector<char> taken(inst.tasks.size(), 0);
  std::vector<Column> out;
  for (int t : routing_dailies(inst)) {
    const auto eligible = eligible_tasks(t, inst);
    std::vector<int> chosen;
    Minutes load = 0;
    for (int i : order) {
      if (taken[i] || !std::binary_search(eligible.begin(), eligible.end(), i)) continue;
      const Minutes add = inst.tasks[i].duration + inst.depot_to_task(t, i);
      if (load + add > inst.dailies[t].capacity) continue;
      const bool clash = std::any_of(chosen.begin(), chosen.end(),
                                     [&](int j) { return overlap(inst.tasks[i], inst.tasks[j]); });
      if (clash) continue;
      chosen.push_back(i);
      load += add;
      taken[i] = 1;
    }
    if (chosen.empty()) continue;
    auto col = make_column(p, t, chosen);
    if (!col) throw InternalError("greedy column for " + inst.dailies[t].id + " is not representable");
    out.push_back(std::move(*col));
  }
  for (int t = 0; t < static_cast<int>(inst.dailies.size()); ++t) {
    Column empty;
    empty.daily = t;
    out.push_back(std::move(empty));
  }
  return out;
}

Master build_master(const std::vector<Column>& columns, const ColgenProblem& p, bool integral) {
  const Instance& inst = p.instance;
  const auto& cat = p.catalog;
  const int n_daily = static_cast<int>(inst.dailies.size());
  const int n_task = static_cast<int>(inst.tasks.size());
  Master ms;
  auto& m = ms.model;
  auto binary = [&](std::string name, double cost) {
    return integral ? m.add_binary(std::move(name), cost) : m.add_continuous(std::move(name), 0.0, 1.0, cost);
  };

  std::vector<std::vector<int>> by_daily(n_daily);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto& col = columns[c];
    if (col.daily < 0 || col.daily >= n_daily) {
      throw InputError("column " + std::to_string(c) + " references unknown technician");
    }
    const std::string name = "col" + std::to_string(c);
    ms.column_vars.push_back(integral ? m.add_binary(name, col.cost)
                                      : m.add_continuous(name, 0.0, lp::kInf, col.cost));
    by_daily[col.daily].push_back(static_cast<int>(c));
  }
  ms.y.assign(n_task, -1);
  for (int i = 0; i < n_task; ++i) {
    if (inst.tasks[i].digitized) continue;
    ms.y[i] = m.add_continuous("y[" + inst.tasks[i].id + "]", 0.0, lp::kInf,
                               static_cast<double>(inst.tasks[i].penalty));
  }
  for (int i = 0; i < n_task; ++i) {
    const auto it = cat.digitization_cost.find(inst.tasks[i].id);
    if (it == cat.digitization_cost.end() || inst.tasks[i].digitized) continue;
    ms.u_dig[i] = binary("udig[" + inst.tasks[i].id + "]", static_cast<double>(it->second));
  }
  for (std::size_t c = 0; c < cat.new_tech_candidates.size(); ++c) {
    const int mi = inst.master_index(cat.new_tech_candidates[c].id);
    const bool usable = std::any_of(p.techs.begin(), p.techs.end(), [&](const TechOptions& to) {
      return inst.dailies[to.daily].master == mi && !to.options.empty();
    });
    if (usable) ms.u_nt[mi] = binary("unt[" + inst.masters[mi].id + "]", static_cast<double>(cat.new_tech_cost[c]));
  }
  for (const auto& to : p.techs) {
    if (to.options.empty()) continue;
    const auto& tech = inst.dailies[to.daily];
    if (to.overtime_available) {
      ms.u_ot[to.daily] = binary("uot[" + tech.id + "]", static_cast<double>(cat.overtime_cost));
    }
    for (int b : to.bundles) {
      const std::pair<int, int> key{tech.master, b};
      if (!ms.u_skill.count(key)) {
        ms.u_skill[key] = binary("uskill[" + inst.masters[tech.master].id + "," + std::to_string(b) + "]",
                                 static_cast<double>(cat.skill_bundles[b].cost));
      }
    }
  }

  ms.alpha.assign(n_daily, -1);
  ms.beta.assign(n_daily, -1);
  ms.gamma.assign(n_daily, -1);
  ms.nu.assign(n_task, -1);
  for (int t = 0; t < n_daily; ++t) {
    if (by_daily[t].empty()) continue;
    lp::Terms row;
    for (int c : by_daily[t]) row.push_back({ms.column_vars[c], 1.0});
    ms.alpha[t] = m.add_constraint("alpha[" + inst.dailies[t].id + "]", std::move(row), lp::Sense::le, 1.0);
  }
  for (int t = 0; t < n_daily; ++t) {
    const auto u = ms.u_nt.find(inst.dailies[t].master);
    if (!inst.dailies[t].is_new || u == ms.u_nt.end() || by_daily[t].empty()) continue;
    lp::Terms row{{u->second, -1.0}};
    for (int c : by_daily[t]) row.push_back({ms.column_vars[c], 1.0});
    ms.beta[t] = m.add_constraint("beta[" + inst.dailies[t].id + "]", std::move(row), lp::Sense::le, 0.0);
  }
  for (const auto& [t, u] : ms.u_ot) {
    lp::Terms row{{u, -1.0}};
    for (int c : by_daily[t]) {
      if (columns[c].overtime) row.push_back({ms.column_vars[c], 1.0});
    }
    ms.gamma[t] = m.add_constraint("gamma[" + inst.dailies[t].id + "]", std::move(row), lp::Sense::le, 0.0);
  }
  for (const auto& to : p.techs) {
    if (to.options.empty()) continue;
    const int t = to.daily;
    for (int b : to.bundles) {
      lp::Terms row{{ms.u_skill.at({inst.dailies[t].master, b}), -1.0}};
      for (int c : by_daily[t]) {
        const auto& bs = columns[c].bundles;
        if (std::binary_search(bs.begin(), bs.end(), b)) row.push_back({ms.column_vars[c], 1.0});
      }
      ms.mu[{t, b}] = m.add_constraint("mu[" + inst.dailies[t].id + "," + std::to_string(b) + "]",
                                       std::move(row), lp::Sense::le, 0.0);
    }
  }
  std::vector<lp::Terms> cover(n_task);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (int i : columns[c].tasks) cover[i].push_back({ms.column_vars[c], 1.0});
  }
  for (int i = 0; i < n_task; ++i) {
    if (ms.y[i] < 0) continue;
    auto row = std::move(cover[i]);
    row.push_back({ms.y[i], 1.0});
    if (const auto d = ms.u_dig.find(i); d != ms.u_dig.end()) row.push_back({d->second, 1.0});
    ms.nu[i] = m.add_constraint("nu[" + inst.tasks[i].id + "]", std::move(row), lp::Sense::ge, 1.0);
  }
  auto budget = [&](const char* name, const auto& vars, const std::optional<int>& limit) {
    if (!limit) return;
    lp::Terms row;
    for (const auto& [key, var] : vars) row.push_back({var, 1.0});
    if (!row.empty()) m.add_constraint(name, std::move(row), lp::Sense::le, *limit);
  };
  budget("budget_ot", ms.u_ot, cat.budgets.overtime);
  budget("budget_dig", ms.u_dig, cat.budgets.digitization);
  budget("budget_skill", ms.u_skill, cat.budgets.skill);
  budget("budget_nt", ms.u_nt, cat.budgets.new_tech);
  return ms;
}

Duals extract_duals(const Master& ms, const lp::LpSolution& sol) {
  constexpr double tol = 1e-6;
  Duals d;
  auto read = [&](const std::vector<int>& rows, std::vector<double>& out, double sign, const char* family) {
    out.assign(rows.size(), 0.0);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k] < 0) continue;
      out[k] = sol.duals.at(rows[k]);
      if (sign * out[k] < -tol) {
        throw InternalError(std::string("dual of ") + family + " row " + std::to_string(k) + " has wrong sign: " +
                            std::to_string(out[k]));
      }
    }
  };
  read(ms.alpha, d.alpha, -1.0, "alpha");
  read(ms.beta, d.beta, -1.0, "beta");
  read(ms.gamma, d.gamma, -1.0, "gamma");
  read(ms.nu, d.nu, 1.0, "nu");
  for (const auto& [key, row] : ms.mu) {
    const double v = sol.duals.at(row);
    if (v > tol) throw InternalError("dual of mu row has wrong sign: " + std::to_string(v));
    d.mu[key] = v;
  }
  return d;
}

double reduced_cost(const Column& col, const Duals& d) {
  double rc = col.cost;
  if (col.overtime) rc -= at(d.gamma, col.daily);
  for (int b : col.bundles) {
    const auto it = d.mu.find({col.daily, b});
    if (it != d.mu.end()) rc -= it->second;
  }
  for (int i : col.tasks) rc -= at(d.nu, i);
  rc -= at(d.alpha, col.daily) + at(d.beta, col.daily);
  return rc;
}

std::optional<Pricing> price(int daily, const Duals& duals, const ColgenProblem& p, double time_limit,
                             double neg_tol) {
  const Instance& inst = p.instance;
  const auto& to = p.techs.at(daily);
  if (to.options.empty()) return std::nullopt;
  const auto& tech = inst.dailies[daily];
  const double k = p.k;

  lp::LinearModel m;
  std::vector<int> x;
  for (const auto& o : to.options) x.push_back(m.add_binary("x[" + inst.tasks[o.task].id + "]", -at(duals.nu, o.task)));
  const int z = m.add_continuous("zhat", 0.0, lp::kInf, 1.0);
  int uot = -1;
  if (to.overtime_available) uot = m.add_binary("uot", -at(duals.gamma, daily));
  std::map<int, int> ub;
  for (int b : to.bundles) {
    const auto it = duals.mu.find({daily, b});
    ub[b] = m.add_binary("u" + std::to_string(b), it == duals.mu.end() ? 0.0 : -it->second);
  }
  const auto& opts = to.options;
  for (std::size_t a = 0; a < opts.size(); ++a) {
    const int i = opts[a].task;
    const double cd = k * static_cast<double>(inst.depot_to_task(daily, i));
    if (cd > 0) m.add_constraint("dep" + std::to_string(a), {{z, 1.0}, {x[a], -cd}}, lp::Sense::ge, 0.0);
    for (std::size_t b = a + 1; b < opts.size(); ++b) {
      const int j = opts[b].task;
      const std::string tag = std::to_string(a) + "_" + std::to_string(b);
      const double c = k * static_cast<double>(std::max(inst.task_travel(i, j), inst.task_travel(j, i)));
      if (c > 0) m.add_constraint("pair" + tag, {{z, 1.0}, {x[a], -c}, {x[b], -c}}, lp::Sense::ge, -c);
      if (overlap(inst.tasks[i], inst.tasks[j])) {
        m.add_constraint("ovl" + tag, {{x[a], 1.0}, {x[b], 1.0}}, lp::Sense::le, 1.0);
      }
    }
  }
  lp::Terms cap;
  for (std::size_t a = 0; a < opts.size(); ++a) {
    const int i = opts[a].task;
    cap.push_back({x[a], static_cast<double>(inst.tasks[i].duration + inst.depot_to_task(daily, i))});
  }
  if (uot >= 0) cap.push_back({uot, -static_cast<double>(p.catalog.overtime_minutes)});
  m.add_constraint("cap", std::move(cap), lp::Sense::le, static_cast<double>(tech.capacity));
  for (std::size_t a = 0; a < opts.size(); ++a) {
    if (opts[a].needs_overtime) m.add_constraint("got" + std::to_string(a), {{x[a], 1.0}, {uot, -1.0}}, lp::Sense::le, 0.0);
    for (int b : opts[a].bundles) {
      m.add_constraint("gsk" + std::to_string(a) + "_" + std::to_string(b), {{x[a], 1.0}, {ub.at(b), -1.0}},
                       lp::Sense::le, 0.0);
    }
  }

  const double constant = -(at(duals.alpha, daily) + at(duals.beta, daily));
  lp::MipOptions mo;
  mo.time_limit_seconds = time_limit;
  mo.incumbent = std::vector<double>(m.num_variables(), 0.0);
  const auto mip = lp::solve_mip(m, mo);
  if (mip.values.empty()) return std::nullopt;

  std::vector<int> tasks;
  for (std::size_t a = 0; a < opts.size(); ++a) {
    if (mip.values[x[a]] > 0.5) tasks.push_back(opts[a].task);
  }
  if (tasks.empty()) return std::nullopt;
  auto col = make_column(p, daily, tasks);
  if (!col) throw InternalError("pricing for " + tech.id + " produced an unrepresentable column");

  // Objective of the cleaned point: investments only where the tasks need them.
  std::vector<double> point(m.num_variables(), 0.0);
  for (std::size_t a = 0; a < opts.size(); ++a) point[x[a]] = mip.values[x[a]] > 0.5 ? 1.0 : 0.0;
  point[z] = col->cost;
  if (uot >= 0 && col->overtime) point[uot] = 1.0;
  for (int b : col->bundles) point[ub.at(b)] = 1.0;
  if (const auto bad = m.first_violation(point)) {
    throw InternalError("cleaned pricing point for " + tech.id + " violates " + *bad);
  }
  Pricing out{std::move(*col), m.objective_value(point) + constant};
  if (!(out.objective < neg_tol)) return std::nullopt;
  return out;
}

std::vector<int> select_technicians(const Duals& duals, const ColgenProblem& p, std::size_t cap) {
  std::vector<int> ts;
  for (const auto& to : p.techs) {
    if (!to.options.empty()) ts.push_back(to.daily);
  }
  auto key = [&](int t) { return at(duals.alpha, t) + at(duals.beta, t); };
  std::stable_sort(ts.begin(), ts.end(), [&](int a, int b) {
    const double ka = key(a), kb = key(b);
    if (ka != kb) return ka > kb;
    return p.instance.dailies[a].id < p.instance.dailies[b].id;
  });
  if (ts.size() > cap) ts.resize(cap);
  return ts;
}

ColgenConfig large_profile() {
  ColgenConfig c;
  c.global_cap = 500;
  c.master_lp_time = 120.0;
  c.final_ip_time = 1200.0;
  return c;
}

namespace {

// Point of the integral master choosing `chosen` columns (no investments).
std::optional<std::vector<double>> plain_point(const Master& ms, const std::vector<Column>& columns,
                                               const std::vector<int>& chosen, const ColgenProblem& p) {
  std::vector<double> v(ms.model.num_variables(), 0.0);
  std::vector<char> covered(p.instance.tasks.size(), 0);
  for (int c : chosen) {
    if (columns[c].overtime || !columns[c].bundles.empty() || p.instance.dailies[columns[c].daily].is_new) {
      return std::nullopt;
    }
    v[ms.column_vars[c]] = 1.0;
    for (int i : columns[c].tasks) covered[i] = 1;
  }
  for (std::size_t i = 0; i < covered.size(); ++i) {
    if (ms.y[i] >= 0 && !covered[i]) v[ms.y[i]] = 1.0;
  }
  if (ms.model.first_violation(v)) return std::nullopt;
  return v;
}

}  // namespace

ColgenResult run_colgen(const Instance& instance, const InvestmentCatalog& catalog, const ColgenConfig& config,
                        const Solution* warmstart) {
  if (config.max_iters < 0 || config.subproblem_time <= 0 || config.master_lp_time <= 0 ||
      config.final_ip_time <= 0 || config.global_cap == 0) {
    throw InputError("column generation limits must be positive");
  }
  const auto start = Clock::now();
  ColgenResult r;
  r.problem = make_problem(instance, catalog, config.k);
  const ColgenProblem& p = r.problem;
  std::set<std::tuple<int, std::vector<int>, bool, std::vector<int>>> seen;
  auto add = [&](Column col) {
    if (!seen.insert({col.daily, col.tasks, col.overtime, col.bundles}).second) return false;
    r.columns.push_back(std::move(col));
    return true;
  };

  std::vector<int> greedy_cols, warm_cols;
  for (auto& col : initial_columns(p)) {
    const bool nonempty = !col.tasks.empty();
    if (add(std::move(col)) && nonempty) greedy_cols.push_back(static_cast<int>(r.columns.size()) - 1);
  }
  if (warmstart) {
    for (const auto& route : warmstart->routes) {
      if (route.visits.empty()) continue;
      std::vector<int> tasks;
      for (const auto& v : route.visits) tasks.push_back(p.instance.task_index(v.task));
      auto col = make_column(p, p.instance.daily_index(route.technician), tasks);
      if (!col) continue;
      Column copy = *col;
      if (add(std::move(*col))) {
        warm_cols.push_back(static_cast<int>(r.columns.size()) - 1);
      } else {
        for (std::size_t c = 0; c < r.columns.size(); ++c) {
          if (r.columns[c].key() == copy.key()) warm_cols.push_back(static_cast<int>(c));
        }
      }
    }
  }

  std::size_t priceable = 0;
  for (const auto& to : p.techs) priceable += to.options.empty() ? 0 : 1;
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const auto master = build_master(r.columns, p);
    const auto lp = lp::solve_lp(master.model, config.master_lp_time);
    if (lp.status != lp::Status::optimal) break;
    const auto duals = extract_duals(master, lp);
    const auto techs = select_technicians(duals, p, config.global_cap);
    int added = 0;
    for (int t : techs) {
      auto pr = price(t, duals, p, config.subproblem_time, config.neg_tol);
      if (!pr) continue;
      const double rc = reduced_cost(pr->column, duals);
      if (add(pr->column)) {
        r.audit.push_back({iter, t, pr->objective, rc});
        ++added;
      }
    }
    // The previous optimum stays feasible after adding columns, so a re-solve
    // that lands a rounding error above it has not found a worse LP value.
    const double value = r.trace.empty() ? lp.objective : std::min(lp.objective, r.trace.back().lp_objective);
    r.iterations = iter;
    r.lp_objective = value;
    r.trace.push_back({iter, value, added, elapsed(start)});
    if (added == 0) {
      r.cg_optimal = techs.size() == priceable;
      break;
    }
  }

  r.master = build_master(r.columns, p, true);
  lp::MipOptions mo;
  mo.time_limit_seconds = config.final_ip_time;
  double best = lp::kInf;
  for (const auto* chosen : {&greedy_cols, &warm_cols}) {
    if (chosen == &warm_cols && warm_cols.empty()) continue;
    auto hint = plain_point(r.master, r.columns, *chosen, p);
    if (hint && r.master.model.objective_value(*hint) < best) {
      best = r.master.model.objective_value(*hint);
      mo.incumbent = std::move(hint);
    }
  }
  r.mip = lp::solve_mip(r.master.model, mo);
  if (r.mip.values.empty()) throw InternalError("integer master has no solution");
  r.seconds = elapsed(start);
  return r;
}

std::string lp_trace_csv(const std::vector<LpTracePoint>& trace) {
  std::ostringstream out;
  out << "iteration,lp_obj,n_new_cols,seconds\n";
  char buf[64];
  for (const auto& pt : trace) {
    std::snprintf(buf, sizeof buf, "%.6f", pt.lp_objective);
    out << pt.iteration << ',' << buf << ',' << pt.new_columns << ',';
    std::snprintf(buf, sizeof buf, "%.3f", pt.seconds);
    out << buf << '\n';
  }
  return out.str();
}

}  // namespace trsp
