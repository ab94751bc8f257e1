#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "trsp/alns.hpp"
#include "trsp/io.hpp"
#include "trsp/lp.hpp"

using namespace trsp;

namespace {

// Two tasks, two technicians at separate depots; matrix over
// {A, B, depot1, depot2}.
Instance two_by_two(const std::vector<std::vector<Minutes>>& c, SkillSet skills_a, SkillSet tech1, SkillSet tech2,
                    TimeWindow window = {560, 640}, Minutes duration = 60) {
  Instance inst;
  inst.skills = {"s1", "s2"};
  for (int k = 0; k < 2; ++k) {
    Task t;
    t.id = k == 0 ? "A" : "B";
    t.required_skills = k == 0 ? skills_a : SkillSet{0};
    t.duration = duration;
    t.window = window;
    t.penalty = 1000;
    t.location = k;
    inst.tasks.push_back(t);
  }
  for (int k = 0; k < 2; ++k) {
    MasterTechnician m;
    m.id = k == 0 ? "m1" : "m2";
    m.location = 2 + k;
    m.skills = k == 0 ? tech1 : tech2;
    m.shifts = {{0, {540, 1020}}};
    inst.masters.push_back(m);
  }
  inst.travel = TravelMatrix(4);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) inst.travel.set(a, b, c[a][b]);
  }
  inst.explicit_travel = true;
  inst.rebuild_dailies();
  validate_instance(inst);
  return inst;
}

const std::vector<std::vector<Minutes>> kRegretMatrix = {
    {0, 15, 10, 20}, {15, 0, 5, 8}, {10, 5, 0, 10}, {20, 8, 10, 0}};

SyntheticParams small_params() {
  SyntheticParams p;
  p.n_tasks = 7;
  p.n_masters = 2;
  p.n_skills = 2;
  p.area = 80;
  p.min_penalty = 40;
  p.max_penalty = 200;
  p.window_style = WindowStyle::narrow;
  return p;
}

void expect_valid(const Instance& inst, const Solution& sol) {
  EXPECT_EQ(solution_objective(sol, inst), sol.objective);
  for (const auto& r : sol.routes) {
    const auto v = validate_route(r, inst);
    EXPECT_TRUE(v.empty()) << r.technician << ": " << (v.empty() ? "" : v[0].constraint + " " + v[0].detail);
  }
}

}  // namespace

TEST(InitialGreedy, NoTechniciansLeavesAllUnserved) {
  auto inst = gen_synthetic(1, small_params());
  inst.masters.clear();
  inst.travel = TravelMatrix(static_cast<int>(inst.tasks.size()));
  inst.rebuild_dailies();
  const auto sol = initial_greedy(inst);
  EXPECT_TRUE(sol.routes.empty());
  EXPECT_EQ(sol.unserved.size(), inst.tasks.size());
}

TEST(InitialGreedy, ServesOnlyWhenPenaltyExceedsRoundTrip) {
  auto inst = two_by_two(kRegretMatrix, {0}, {0}, {});
  inst.tasks.pop_back();
  inst.tasks[0].penalty = 21;
  EXPECT_EQ(initial_greedy(inst).routes.size(), 1u);
  inst.tasks[0].penalty = 20;
  EXPECT_TRUE(initial_greedy(inst).routes.empty());
}

TEST(InitialGreedy, AlwaysValid) {
  SyntheticParams p;
  p.n_tasks = 30;
  p.n_masters = 4;
  p.n_days = 2;
  p.window_style = WindowStyle::narrow;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = gen_synthetic(seed, p);
    expect_valid(inst, initial_greedy(inst));
  }
}

TEST(Destroy, RandomRemovesFortyToSixtyPercent) {
  SyntheticParams p;
  p.n_tasks = 10;
  p.n_masters = 4;
  p.max_duration = 30;
  p.min_penalty = 1000;
  p.max_penalty = 2000;
  p.skill_probability = 1.0;
  p.area = 20;
  const auto inst = gen_synthetic(2, p);
  const auto start = plan_from_solution(inst, initial_greedy(inst));
  ASSERT_EQ(std::count(start.served.begin(), start.served.end(), 1), 10);
  std::mt19937_64 rng(5);
  std::set<int> seen;
  for (int k = 0; k < 200; ++k) {
    auto plan = start;
    const int q = destroy(inst, plan, DestroyMethod::random, rng);
    EXPECT_GE(q, 4);
    EXPECT_LE(q, 6);
    EXPECT_EQ(std::count(plan.served.begin(), plan.served.end(), 1), 10 - q);
    seen.insert(q);
    expect_valid(inst, plan_to_solution(inst, plan));
  }
  EXPECT_EQ(seen, (std::set<int>{4, 5, 6}));
}

TEST(Destroy, RouteDestroyEmptiesTheOnlyRoute) {
  auto inst = two_by_two(kRegretMatrix, {0}, {0}, {}, {540, 900}, 30);
  const auto sol = initial_greedy(inst);
  ASSERT_EQ(sol.routes.size(), 1u);
  std::mt19937_64 rng(1);
  const auto out = destroy(inst, sol, DestroyMethod::route, rng);
  EXPECT_TRUE(out.routes.empty());
  EXPECT_EQ(out.unserved.size(), 2u);
}

TEST(Destroy, NothingServedIsIdentity) {
  auto inst = two_by_two(kRegretMatrix, {0}, {}, {});
  auto plan = empty_plan(inst);
  std::mt19937_64 rng(1);
  EXPECT_EQ(destroy(inst, plan, DestroyMethod::random, rng), 0);
  EXPECT_EQ(destroy(inst, plan, DestroyMethod::route, rng), 0);
}

TEST(Repair, SingleSlotIsUsed) {
  auto inst = two_by_two(kRegretMatrix, {0}, {0}, {});
  inst.tasks.pop_back();
  auto plan = empty_plan(inst);
  repair(inst, plan, RepairMethod::greedy);
  EXPECT_EQ(plan.seqs[0], std::vector<int>{0});
  EXPECT_EQ(plan.travel[0], 20);
}

TEST(Repair, RegretInsertsSingleRouteTaskFirst) {
  // A needs s2 (tech1 only). B is cheaper on tech1; one task fits per route.
  const auto inst = two_by_two(kRegretMatrix, {1}, {0, 1}, {0});
  auto greedy = empty_plan(inst);
  repair(inst, greedy, RepairMethod::greedy);
  EXPECT_EQ(greedy.seqs[0], std::vector<int>{1});
  EXPECT_FALSE(greedy.served[0]);

  auto regret = empty_plan(inst);
  repair(inst, regret, RepairMethod::regret);
  EXPECT_EQ(regret.seqs[0], std::vector<int>{0});
  EXPECT_EQ(regret.seqs[1], std::vector<int>{1});
  EXPECT_LT(plan_objective(inst, regret), plan_objective(inst, greedy));
}

TEST(Repair, FromEmptyIsValidAndNoWorseThanAllUnserved) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = gen_synthetic(seed, small_params());
    Minutes all_unserved = 0;
    for (const auto& t : inst.tasks) all_unserved += t.penalty;
    for (auto m : {RepairMethod::greedy, RepairMethod::regret}) {
      auto plan = empty_plan(inst);
      repair(inst, plan, m);
      const auto sol = plan_to_solution(inst, plan);
      expect_valid(inst, sol);
      EXPECT_LE(sol.objective, all_unserved);
    }
  }
}

TEST(RunAlns, ZeroBudgetReturnsInitial) {
  const auto inst = gen_synthetic(4, small_params());
  AlnsConfig cfg;
  cfg.seconds_per_retry = 0.0;
  const auto res = run_alns(inst, cfg);
  EXPECT_EQ(res.best, initial_greedy(inst));
  EXPECT_EQ(res.stats.iterations, 0);
}

TEST(RunAlns, SameSeedSameResult) {
  SyntheticParams p;
  p.n_tasks = 25;
  p.n_masters = 3;
  const auto inst = gen_synthetic(8, p);
  AlnsConfig cfg;
  cfg.retries = 2;
  cfg.iterations_per_retry = 300;
  cfg.seed = 77;
  const auto a = run_alns(inst, cfg);
  const auto b = run_alns(inst, cfg);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.stats.best_trace, b.stats.best_trace);
  EXPECT_EQ(a.pool.entries().size(), b.pool.entries().size());
}

TEST(RunAlns, BestTraceNonincreasingAndWeightsPositive) {
  SyntheticParams p;
  p.n_tasks = 30;
  p.n_masters = 3;
  const auto inst = gen_synthetic(9, p);
  AlnsConfig cfg;
  cfg.retries = 1;
  cfg.iterations_per_retry = 500;
  const auto res = run_alns(inst, cfg);
  for (std::size_t k = 1; k < res.stats.best_trace.size(); ++k) {
    EXPECT_LE(res.stats.best_trace[k], res.stats.best_trace[k - 1]);
  }
  for (double w : res.stats.destroy_weights) EXPECT_TRUE(w > 0 && std::isfinite(w));
  for (double w : res.stats.repair_weights) EXPECT_TRUE(w > 0 && std::isfinite(w));
  EXPECT_LE(res.best.objective, initial_greedy(inst).objective);
  expect_valid(inst, res.best);
}

TEST(RunAlns, FindsBruteForceOptimumOnSmallInstances) {
  int hits = 0;
  double gap = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = gen_synthetic(seed, small_params());
    AlnsConfig cfg;
    cfg.iterations_per_retry = 5000;
    cfg.seconds_per_retry = 1.0;
    cfg.seed = seed;
    const auto res = run_alns(inst, cfg);
    const Minutes opt = trsp::testing::brute_force_trsp(inst);
    EXPECT_GE(res.best.objective, opt) << "seed " << seed;
    hits += res.best.objective == opt;
    gap += static_cast<double>(res.best.objective - opt) / static_cast<double>(std::max<Minutes>(1, opt));
  }
  EXPECT_GE(hits, 48);
  EXPECT_LE(gap / 50.0, 0.01);
}

TEST(RunAlns, InvalidConfigRejected) {
  AlnsConfig cfg;
  cfg.destroy_min_fraction = 0.7;
  EXPECT_THROW(validate_config(cfg), InputError);
  cfg = {};
  cfg.weight_decay = 1.0;
  EXPECT_THROW(validate_config(cfg), InputError);
}

TEST(PathPool, PotentialIsMinimumAndPruneKeepsBest) {
  PathPool pool;
  pool.add({0, {1, 2}, 10, 500});
  pool.add({0, {1, 2}, 10, 300});
  pool.add({0, {1, 2}, 10, 400});
  pool.add({1, {3}, 4, 200});
  pool.add({1, {4}, 4, 900});
  EXPECT_EQ(pool.entries().at({0, {1, 2}}).potential, 300);
  pool.prune(2);
  EXPECT_EQ(pool.size(), 2u);
  EXPECT_TRUE(pool.entries().count({1, {3}}));
  EXPECT_FALSE(pool.entries().count({1, {4}}));
}

TEST(SetCover, IncumbentOnlyPoolReturnsIncumbent) {
  const auto inst = gen_synthetic(3, small_params());
  const auto inc = initial_greedy(inst);
  PathPool pool;
  pool.record(inst, plan_from_solution(inst, inc), inc.objective);
  EXPECT_EQ(setcover_finalize(pool, inst, inc).objective, inc.objective);
}

TEST(SetCover, CheaperSwapIsFound) {
  // A sits next to depot2 and B next to depot1; the incumbent has them crossed.
  const std::vector<std::vector<Minutes>> c = {{0, 30, 25, 3}, {30, 0, 3, 25}, {25, 3, 0, 24}, {3, 25, 24, 0}};
  const auto inst = two_by_two(c, {0}, {0}, {0});
  RoutePlan crossed = empty_plan(inst);
  crossed.seqs = {{0}, {1}};
  crossed.travel = {50, 50};
  crossed.served = {1, 1};
  const auto inc = plan_to_solution(inst, crossed);
  PathPool pool;
  pool.record(inst, crossed, inc.objective);
  pool.add({0, {1}, 6, 1000});
  pool.add({1, {0}, 6, 1000});
  pool.add({0, {0, 1}, 56, 1000});
  const auto out = setcover_finalize(pool, inst, inc);
  EXPECT_EQ(out.objective, 12);
  EXPECT_LT(out.objective, inc.objective);
  expect_valid(inst, out);

  // Same selection model solved exhaustively.
  lp::LinearModel m;
  std::vector<std::pair<int, std::vector<int>>> paths;
  for (const auto& [key, e] : pool.entries()) {
    m.add_binary("p" + std::to_string(paths.size()), static_cast<double>(e.travel));
    paths.push_back({e.daily, e.tasks});
  }
  for (int i = 0; i < 2; ++i) {
    lp::Terms t;
    for (std::size_t j = 0; j < paths.size(); ++j) {
      if (std::count(paths[j].second.begin(), paths[j].second.end(), i)) t.push_back({static_cast<int>(j), 1.0});
    }
    t.push_back({m.add_continuous("u" + std::to_string(i), 0, lp::kInf, 1000.0), 1.0});
    m.add_constraint("c" + std::to_string(i), t, lp::Sense::ge, 1.0);
  }
  for (int d = 0; d < 2; ++d) {
    lp::Terms t;
    for (std::size_t j = 0; j < paths.size(); ++j) {
      if (paths[j].first == d) t.push_back({static_cast<int>(j), 1.0});
    }
    m.add_constraint("one" + std::to_string(d), t, lp::Sense::le, 1.0);
  }
  EXPECT_DOUBLE_EQ(lp::enumerate_tiny(m).objective, 12.0);
}

TEST(SetCover, OnePathPerTechnician) {
  const std::vector<std::vector<Minutes>> c = {{0, 30, 3, 3}, {30, 0, 3, 3}, {3, 3, 0, 24}, {3, 3, 24, 0}};
  auto inst = two_by_two(c, {0}, {0}, {0}, {540, 900}, 30);
  inst.masters.pop_back();
  inst.rebuild_dailies();
  PathPool pool;
  pool.add({0, {0}, 6, 100});
  pool.add({0, {1}, 6, 100});
  pool.add({0, {0, 1}, 36, 100});
  const auto inc = initial_greedy(inst);
  const auto out = setcover_finalize(pool, inst, inc);
  EXPECT_LE(out.routes.size(), 1u);
  expect_valid(inst, out);
}
