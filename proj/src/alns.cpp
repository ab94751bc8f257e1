#include "trsp/alns.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "trsp/lp.hpp"

namespace trsp {

namespace {

constexpr Minutes kNoInsert = std::numeric_limits<Minutes>::max();

// Travel of `seq` with `task` inserted before position `pos` (task < 0: no
// insertion), or kNoInsert if some window breaks.
Minutes simulate(const Instance& inst, int daily, const std::vector<int>& seq, std::size_t pos, int task) {
  const auto& tech = inst.dailies[daily];
  Minutes time = tech.window.start;
  Minutes travel = 0;
  int loc = tech.depot;
  const std::size_t n = seq.size() + (task >= 0 ? 1 : 0);
  for (std::size_t k = 0; k < n; ++k) {
    int i;
    if (task < 0) {
      i = seq[k];
    } else {
      i = k < pos ? seq[k] : (k == pos ? task : seq[k - 1]);
    }
    const auto& t = inst.tasks[i];
    const Minutes leg = inst.travel(loc, t.location);
    const Minutes start = std::max(time + leg, t.window.start);
    if (start > t.window.end - t.duration) return kNoInsert;
    if (start + t.duration + inst.travel(t.location, tech.depot) > tech.window.end) return kNoInsert;
    travel += leg;
    time = start + t.duration;
    loc = t.location;
  }
  if (n > 0) travel += inst.travel(loc, tech.depot);
  return travel;
}

struct Insertion {
  Minutes delta = kNoInsert;
  std::size_t pos = 0;
};

Insertion best_insertion(const Instance& inst, const RoutePlan& plan, std::size_t k, int task) {
  Insertion best;
  const auto& seq = plan.seqs[k];
  for (std::size_t pos = 0; pos <= seq.size(); ++pos) {
    const Minutes t = simulate(inst, plan.dailies[k], seq, pos, task);
    if (t == kNoInsert) continue;
    if (t - plan.travel[k] < best.delta) best = {t - plan.travel[k], pos};
  }
  return best;
}

std::vector<std::vector<char>> eligibility(const Instance& inst, const RoutePlan& plan) {
  std::vector<std::vector<char>> out(plan.dailies.size(), std::vector<char>(inst.tasks.size(), 0));
  for (std::size_t k = 0; k < plan.dailies.size(); ++k) {
    for (int i : eligible_tasks(plan.dailies[k], inst)) out[k][i] = 1;
  }
  return out;
}

// Drops tasks until the route is schedulable again; only needed when travel
// times break the triangle inequality.
void restore_route(const Instance& inst, RoutePlan& plan, std::size_t k) {
  auto& seq = plan.seqs[k];
  while (true) {
    const Minutes t = simulate(inst, plan.dailies[k], seq, 0, -1);
    if (t != kNoInsert) {
      plan.travel[k] = t;
      return;
    }
    std::size_t bad = 0;
    while (simulate(inst, plan.dailies[k], std::vector<int>(seq.begin(), seq.begin() + bad + 1), 0, -1) != kNoInsert) {
      ++bad;
    }
    plan.served[seq[bad]] = 0;
    seq.erase(seq.begin() + static_cast<std::ptrdiff_t>(bad));
  }
}

int roulette(const std::vector<double>& w, std::mt19937_64& rng) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  double r = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (std::size_t k = 0; k < w.size(); ++k) {
    if ((r -= w[k]) < 0.0) return static_cast<int>(k);
  }
  return static_cast<int>(w.size()) - 1;
}

}  // namespace

void validate_config(const AlnsConfig& c) {
  if (c.retries < 1) throw InputError("alns: retries must be at least 1");
  if (c.seconds_per_retry < 0.0 || c.iterations_per_retry < 0) throw InputError("alns: negative budget");
  if (!(c.destroy_min_fraction > 0.0 && c.destroy_min_fraction <= c.destroy_max_fraction &&
        c.destroy_max_fraction < 1.0)) {
    throw InputError("alns: destroy fractions must satisfy 0 < min <= max < 1");
  }
  if (!(c.weight_decay > 0.0 && c.weight_decay < 1.0)) throw InputError("alns: decay must lie in (0, 1)");
  if (c.rtr_start_threshold < 0.0) throw InputError("alns: negative record-to-record threshold");
  if (c.pool_cap == 0) throw InputError("alns: pool cap must be positive");
}

RoutePlan empty_plan(const Instance& inst) {
  RoutePlan p;
  p.dailies = routing_dailies(inst);
  p.seqs.assign(p.dailies.size(), {});
  p.travel.assign(p.dailies.size(), 0);
  p.served.assign(inst.tasks.size(), 0);
  return p;
}

RoutePlan plan_from_solution(const Instance& inst, const Solution& sol) {
  RoutePlan p = empty_plan(inst);
  for (const auto& r : sol.routes) {
    const int d = inst.daily_index(r.technician);
    const auto it = std::find(p.dailies.begin(), p.dailies.end(), d);
    if (it == p.dailies.end()) throw InputError("route for non-routing technician '" + r.technician + "'");
    const auto k = static_cast<std::size_t>(it - p.dailies.begin());
    for (const auto& v : r.visits) {
      const int i = inst.task_index(v.task);
      p.seqs[k].push_back(i);
      p.served[i] = 1;
    }
    p.travel[k] = simulate(inst, d, p.seqs[k], 0, -1);
    if (p.travel[k] == kNoInsert) throw InputError("infeasible route for '" + r.technician + "'");
  }
  return p;
}

Solution plan_to_solution(const Instance& inst, const RoutePlan& p) {
  Solution sol;
  for (std::size_t k = 0; k < p.dailies.size(); ++k) {
    if (!p.seqs[k].empty()) sol.routes.push_back(make_route(inst, p.dailies[k], p.seqs[k]));
  }
  for (int i = 0; i < static_cast<int>(inst.tasks.size()); ++i) {
    if (inst.tasks[i].digitized) {
      sol.digitized.push_back(inst.tasks[i].id);
    } else if (!p.served[i]) {
      sol.unserved.push_back(inst.tasks[i].id);
    }
  }
  sol.objective = plan_objective(inst, p);
  return sol;
}

Minutes plan_objective(const Instance& inst, const RoutePlan& p) {
  Minutes total = std::accumulate(p.travel.begin(), p.travel.end(), Minutes{0});
  for (int i = 0; i < static_cast<int>(inst.tasks.size()); ++i) {
    if (!p.served[i] && !inst.tasks[i].digitized) total += inst.tasks[i].penalty;
  }
  return total;
}

Solution initial_greedy(const Instance& inst) {
  RoutePlan p = empty_plan(inst);
  const auto elig = eligibility(inst, p);
  std::vector<int> order;
  for (int i = 0; i < static_cast<int>(inst.tasks.size()); ++i) {
    if (!inst.tasks[i].digitized) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return inst.tasks[a].penalty > inst.tasks[b].penalty; });
  for (int i : order) {
    Insertion best;
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < p.dailies.size(); ++k) {
      if (!elig[k][i]) continue;
      const auto ins = best_insertion(inst, p, k, i);
      if (ins.delta < best.delta) {
        best = ins;
        best_k = k;
      }
    }
    if (best.delta == kNoInsert || best.delta >= inst.tasks[i].penalty) continue;
    p.seqs[best_k].insert(p.seqs[best_k].begin() + static_cast<std::ptrdiff_t>(best.pos), i);
    p.travel[best_k] += best.delta;
    p.served[i] = 1;
  }
  return plan_to_solution(inst, p);
}

int destroy(const Instance& inst, RoutePlan& p, DestroyMethod method, std::mt19937_64& rng,
            const AlnsConfig& cfg) {
  std::vector<std::size_t> touched;
  int removed = 0;
  if (method == DestroyMethod::random) {
    std::vector<int> served;
    for (int i = 0; i < static_cast<int>(p.served.size()); ++i) {
      if (p.served[i]) served.push_back(i);
    }
    const int s = static_cast<int>(served.size());
    if (s == 0) return 0;
    const int lo = std::min(s, static_cast<int>(std::ceil(cfg.destroy_min_fraction * s - 1e-9)));
    const int hi = std::max(lo, static_cast<int>(std::floor(cfg.destroy_max_fraction * s + 1e-9)));
    const int q = std::uniform_int_distribution<int>(lo, hi)(rng);
    for (int k = 0; k < q; ++k) {
      const int pick = std::uniform_int_distribution<int>(k, s - 1)(rng);
      std::swap(served[k], served[pick]);
      p.served[served[k]] = 0;
    }
    removed = q;
    for (std::size_t k = 0; k < p.seqs.size(); ++k) {
      auto& seq = p.seqs[k];
      const auto before = seq.size();
      seq.erase(std::remove_if(seq.begin(), seq.end(), [&](int i) { return !p.served[i]; }), seq.end());
      if (seq.size() != before) touched.push_back(k);
    }
  } else {
    std::vector<std::size_t> nonempty;
    for (std::size_t k = 0; k < p.seqs.size(); ++k) {
      if (!p.seqs[k].empty()) nonempty.push_back(k);
    }
    if (nonempty.empty()) return 0;
    const auto k = nonempty[std::uniform_int_distribution<std::size_t>(0, nonempty.size() - 1)(rng)];
    for (int i : p.seqs[k]) p.served[i] = 0;
    removed = static_cast<int>(p.seqs[k].size());
    p.seqs[k].clear();
    touched.push_back(k);
  }
  for (auto k : touched) restore_route(inst, p, k);
  return removed;
}

void repair(const Instance& inst, RoutePlan& p, RepairMethod method) {
  const auto elig = eligibility(inst, p);
  std::vector<int> open;
  for (int i = 0; i < static_cast<int>(inst.tasks.size()); ++i) {
    if (p.served[i] || inst.tasks[i].digitized) continue;
    for (std::size_t k = 0; k < p.dailies.size(); ++k) {
      if (elig[k][i]) {
        open.push_back(i);
        break;
      }
    }
  }
  const std::size_t n_routes = p.dailies.size();
  std::vector<std::vector<Insertion>> cache(open.size(), std::vector<Insertion>(n_routes));
  auto refresh = [&](std::size_t k) {
    for (std::size_t u = 0; u < open.size(); ++u) {
      cache[u][k] = elig[k][open[u]] ? best_insertion(inst, p, k, open[u]) : Insertion{};
    }
  };
  for (std::size_t k = 0; k < n_routes; ++k) refresh(k);

  while (!open.empty()) {
    std::size_t pick_u = open.size(), pick_k = 0;
    Minutes pick_delta = kNoInsert;
    Minutes pick_regret = -1;
    for (std::size_t u = 0; u < open.size(); ++u) {
      std::size_t k1 = n_routes;
      Minutes b1 = kNoInsert, b2 = kNoInsert;
      for (std::size_t k = 0; k < n_routes; ++k) {
        const Minutes d = cache[u][k].delta;
        if (d < b1) {
          b2 = b1;
          b1 = d;
          k1 = k;
        } else if (d < b2) {
          b2 = d;
        }
      }
      if (b1 == kNoInsert || b1 >= inst.tasks[open[u]].penalty) continue;
      if (method == RepairMethod::greedy) {
        if (b1 < pick_delta) {
          pick_delta = b1;
          pick_u = u;
          pick_k = k1;
        }
      } else {
        const Minutes regret = b2 == kNoInsert ? kNoInsert : b2 - b1;
        if (regret > pick_regret || (regret == pick_regret && b1 < pick_delta)) {
          pick_regret = regret;
          pick_delta = b1;
          pick_u = u;
          pick_k = k1;
        }
      }
    }
    if (pick_u == open.size()) break;
    const int task = open[pick_u];
    const auto ins = cache[pick_u][pick_k];
    p.seqs[pick_k].insert(p.seqs[pick_k].begin() + static_cast<std::ptrdiff_t>(ins.pos), task);
    p.travel[pick_k] += ins.delta;
    p.served[task] = 1;
    open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick_u));
    cache.erase(cache.begin() + static_cast<std::ptrdiff_t>(pick_u));
    refresh(pick_k);
  }
}

Solution destroy(const Instance& inst, const Solution& sol, DestroyMethod method, std::mt19937_64& rng,
                 const AlnsConfig& cfg) {
  auto p = plan_from_solution(inst, sol);
  destroy(inst, p, method, rng, cfg);
  return plan_to_solution(inst, p);
}

Solution repair(const Instance& inst, const Solution& partial, RepairMethod method) {
  auto p = plan_from_solution(inst, partial);
  repair(inst, p, method);
  return plan_to_solution(inst, p);
}

// ---------------------------------------------------------------------------

void PathPool::record(const Instance& inst, const RoutePlan& plan, Minutes objective) {
  (void)inst;
  for (std::size_t k = 0; k < plan.dailies.size(); ++k) {
    if (plan.seqs[k].empty()) continue;
    add({plan.dailies[k], plan.seqs[k], plan.travel[k], objective});
  }
}

void PathPool::add(PoolEntry e) {
  Key key{e.daily, e.tasks};
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    entries_.emplace(std::move(key), std::move(e));
  } else {
    it->second.potential = std::min(it->second.potential, e.potential);
  }
}

void PathPool::merge(const PathPool& other) {
  for (const auto& [key, e] : other.entries_) add(e);
}

void PathPool::prune(std::size_t cap) {
  if (entries_.size() <= cap) return;
  std::vector<std::pair<Minutes, const Key*>> order;
  order.reserve(entries_.size());
  for (const auto& [key, e] : entries_) order.push_back({e.potential, &key});
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cap), order.end(),
                   [](const auto& a, const auto& b) {
                     if (a.first != b.first) return a.first < b.first;
                     return *a.second < *b.second;
                   });
  std::map<Key, PoolEntry> kept;
  for (std::size_t k = 0; k < cap; ++k) kept.emplace(*order[k].second, entries_.at(*order[k].second));
  entries_ = std::move(kept);
}

AlnsResult run_alns(const Instance& inst, const AlnsConfig& cfg) {
  validate_config(cfg);
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  AlnsResult res;
  const RoutePlan start = plan_from_solution(inst, initial_greedy(inst));
  Minutes overall_best = kNoInsert;

  std::seed_seq seq{cfg.seed};
  std::vector<std::uint64_t> sub(static_cast<std::size_t>(cfg.retries));
  {
    std::vector<std::uint32_t> words(sub.size() * 2);
    seq.generate(words.begin(), words.end());
    for (std::size_t r = 0; r < sub.size(); ++r) sub[r] = (std::uint64_t{words[2 * r]} << 32) | words[2 * r + 1];
  }

  for (int retry = 0; retry < cfg.retries; ++retry) {
    std::mt19937_64 rng(sub[static_cast<std::size_t>(retry)]);
    const auto retry_start = Clock::now();
    RoutePlan cur = start, best = start;
    Minutes cur_obj = plan_objective(inst, cur);
    Minutes best_obj = cur_obj;
    std::vector<double> wd(2, 1.0), wr(2, 1.0);
    std::vector<Minutes> trace;
    std::int64_t improvements = 0, last_impr = 0, iter = 0;
    res.pool.record(inst, cur, cur_obj);

    while (true) {
      const double elapsed = std::chrono::duration<double>(Clock::now() - retry_start).count();
      if (elapsed >= cfg.seconds_per_retry) break;
      if (cfg.iterations_per_retry > 0 && iter >= cfg.iterations_per_retry) break;
      const double progress = cfg.iterations_per_retry > 0
                                  ? static_cast<double>(iter) / static_cast<double>(cfg.iterations_per_retry)
                                  : elapsed / cfg.seconds_per_retry;
      const double threshold = cfg.rtr_start_threshold * std::max(0.0, 1.0 - progress);
      ++iter;

      const int d = roulette(wd, rng);
      const int r = roulette(wr, rng);
      RoutePlan cand = cur;
      destroy(inst, cand, d == 0 ? DestroyMethod::random : DestroyMethod::route, rng, cfg);
      repair(inst, cand, r == 0 ? RepairMethod::greedy : RepairMethod::regret);
      const Minutes obj = plan_objective(inst, cand);

      double sigma = 0.0;
      if (static_cast<double>(obj) < (1.0 + threshold) * static_cast<double>(best_obj)) {
        if (obj < best_obj) {
          sigma = cfg.score_best;
          best = cand;
          best_obj = obj;
          ++improvements;
          last_impr = iter;
        } else if (obj < cur_obj) {
          sigma = cfg.score_improve;
        } else {
          sigma = cfg.score_accept;
        }
        cur = std::move(cand);
        cur_obj = obj;
        res.pool.record(inst, cur, cur_obj);
        if (res.pool.size() > 2 * cfg.pool_cap) res.pool.prune(cfg.pool_cap);
      }
      for (auto* w : {&wd[d], &wr[r]}) {
        *w = std::max(1e-9, cfg.weight_decay * *w + (1.0 - cfg.weight_decay) * sigma);
      }
      trace.push_back(best_obj);
    }

    res.stats.iterations += iter;
    if (best_obj < overall_best) {
      overall_best = best_obj;
      res.best = plan_to_solution(inst, best);
      res.stats.improvements = improvements;
      res.stats.last_improvement_iteration = last_impr;
      res.stats.destroy_weights = wd;
      res.stats.repair_weights = wr;
      res.stats.best_trace = std::move(trace);
    }
  }
  res.pool.prune(cfg.pool_cap);
  res.stats.seconds = std::chrono::duration<double>(Clock::now() - started).count();
  return res;
}

Solution setcover_finalize(const PathPool& pool_in, const Instance& inst, const Solution& incumbent,
                           double time_limit_seconds) {
  PathPool pool = pool_in;
  const RoutePlan inc_plan = plan_from_solution(inst, incumbent);
  const Minutes inc_obj = plan_objective(inst, inc_plan);
  for (std::size_t k = 0; k < inc_plan.dailies.size(); ++k) {
    if (!inc_plan.seqs[k].empty()) pool.add({inc_plan.dailies[k], inc_plan.seqs[k], inc_plan.travel[k], inc_obj});
  }

  lp::LinearModel m;
  std::vector<const PoolEntry*> paths;
  std::map<int, lp::Terms> per_tech;
  std::vector<lp::Terms> cover(inst.tasks.size());
  for (const auto& [key, e] : pool.entries()) {
    const int x = m.add_binary("p" + std::to_string(paths.size()), static_cast<double>(e.travel));
    paths.push_back(&e);
    per_tech[e.daily].push_back({x, 1.0});
    for (int i : e.tasks) cover[i].push_back({x, 1.0});
  }
  std::vector<int> y(inst.tasks.size(), -1);
  for (int i = 0; i < static_cast<int>(inst.tasks.size()); ++i) {
    if (inst.tasks[i].digitized) continue;
    y[i] = m.add_continuous("u_" + inst.tasks[i].id, 0.0, lp::kInf, static_cast<double>(inst.tasks[i].penalty));
    cover[i].push_back({y[i], 1.0});
    m.add_constraint("cover_" + inst.tasks[i].id, cover[i], lp::Sense::ge, 1.0);
  }
  for (const auto& [daily, terms] : per_tech) {
    m.add_constraint("one_" + inst.dailies[daily].id, terms, lp::Sense::le, 1.0);
  }

  std::vector<double> hint(m.num_variables(), 0.0);
  for (std::size_t k = 0; k < inc_plan.dailies.size(); ++k) {
    if (inc_plan.seqs[k].empty()) continue;
    const auto it = pool.entries().find({inc_plan.dailies[k], inc_plan.seqs[k]});
    const auto idx = std::distance(pool.entries().begin(), it);
    hint[static_cast<std::size_t>(idx)] = 1.0;
  }
  for (int i = 0; i < static_cast<int>(inst.tasks.size()); ++i) {
    if (y[i] >= 0 && !inc_plan.served[i]) hint[y[i]] = 1.0;
  }
  lp::MipOptions opt;
  opt.time_limit_seconds = time_limit_seconds;
  opt.incumbent = hint;
  const auto mip = lp::solve_mip(m, opt);
  if (mip.values.empty()) return incumbent;

  RoutePlan p = empty_plan(inst);
  for (std::size_t j = 0; j < paths.size(); ++j) {
    if (mip.values[j] < 0.5) continue;
    const auto it = std::find(p.dailies.begin(), p.dailies.end(), paths[j]->daily);
    const auto k = static_cast<std::size_t>(it - p.dailies.begin());
    for (int i : paths[j]->tasks) {
      if (p.served[i]) continue;  // covered twice: keep the first copy
      p.seqs[k].push_back(i);
      p.served[i] = 1;
    }
  }
  for (std::size_t k = 0; k < p.dailies.size(); ++k) {
    p.travel[k] = simulate(inst, p.dailies[k], p.seqs[k], 0, -1);
    if (p.travel[k] == kNoInsert) return incumbent;
  }
  const Minutes obj = plan_objective(inst, p);
  return obj < inc_obj ? plan_to_solution(inst, p) : incumbent;
}

}  // namespace trsp
