#include <gtest/gtest.h>

#include <chrono>

#include "oracles.hpp"
#include "trsp/alns.hpp"
#include "trsp/io.hpp"
#include "trsp/trsp_mip.hpp"

using namespace trsp;

namespace {

Instance one_task(Minutes penalty, double x) {
  Instance inst;
  inst.skills = {"s"};
  Task t;
  t.id = "a";
  t.required_skills = {0};
  t.duration = 30;
  t.window = {540, 900};
  t.penalty = penalty;
  t.x = x;
  t.location = 0;
  inst.tasks = {t};
  MasterTechnician m;
  m.id = "m";
  m.location = 1;
  m.skills = {0};
  m.shifts = {{0, {540, 1020}}};
  inst.masters = {m};
  inst.travel = TravelMatrix(2);
  const Minutes c = euclidean_minutes(x, 0, 0, 0);
  inst.travel.set(0, 1, c);
  inst.travel.set(1, 0, c);
  inst.rebuild_dailies();
  return inst;
}

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

}  // namespace

TEST(BuildTrsp, VariableCountsForOneTechTwoTasks) {
  SyntheticParams p;
  p.n_tasks = 2;
  p.n_masters = 1;
  p.n_skills = 1;
  p.area = 10;
  const auto inst = gen_synthetic(1, p);
  const auto tm = build_trsp(inst);
  ASSERT_EQ(tm.techs.size(), 1u);
  ASSERT_EQ(tm.techs[0].tasks.size(), 2u);
  EXPECT_EQ(tm.techs[0].arc.size(), 6u);
  EXPECT_EQ(tm.techs[0].z.size(), 2u);
  EXPECT_EQ(tm.model.num_variables(), 6 + 2 + 2);
  EXPECT_EQ(tm.model.num_binaries(), 6);
}

TEST(BuildTrsp, NoServableTaskGivesPenaltySum) {
  auto inst = one_task(300, 10);
  inst.masters[0].skills = {};
  inst.skills = {"s", "t"};
  inst.masters[0].skills = {1};
  inst.rebuild_dailies();
  const auto r = solve_trsp(inst);
  EXPECT_EQ(r.solution.objective, 300);
  EXPECT_EQ(r.solution.unserved, std::vector<std::string>{"a"});
}

TEST(SolveTrsp, ProfitableTaskIsServed) {
  const auto r = solve_trsp(one_task(100, 10));
  ASSERT_EQ(r.solution.routes.size(), 1u);
  EXPECT_EQ(r.solution.objective, 20);
  EXPECT_TRUE(validate_route(r.solution.routes[0], one_task(100, 10)).empty());
}

TEST(SolveTrsp, CheapPenaltyLeavesTaskUnserved) {
  const auto r = solve_trsp(one_task(15, 10));
  EXPECT_TRUE(r.solution.routes.empty());
  EXPECT_EQ(r.solution.objective, 15);
}

TEST(SolveTrsp, LpRelaxationBoundsOptimum) {
  const auto inst = gen_synthetic(3, small_params());
  const auto tm = build_trsp(inst);
  auto relaxed = tm.model;
  for (auto& v : relaxed.mutable_variables()) v.type = lp::VarType::continuous;
  const auto lp = lp::solve_lp(relaxed);
  ASSERT_EQ(lp.status, lp::Status::optimal);
  EXPECT_LE(lp.objective, static_cast<double>(solve_trsp(inst).solution.objective) + 1e-6);
}

TEST(SolveTrsp, MatchesBruteForceOnSmallInstances) {
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = gen_synthetic(seed, small_params());
    const auto r = solve_trsp(inst);
    ASSERT_EQ(r.status, lp::Status::optimal) << "seed " << seed;
    EXPECT_EQ(r.solution.objective, trsp::testing::brute_force_trsp(inst)) << "seed " << seed;
    EXPECT_EQ(r.solution.objective, solution_objective(r.solution, inst));
    for (const auto& route : r.solution.routes) EXPECT_TRUE(validate_route(route, inst).empty());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 60.0);
}

TEST(SolveTrsp, GreedyIncumbentIsFeasiblePoint) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = gen_synthetic(seed, small_params());
    const auto tm = build_trsp(inst);
    const auto g = initial_greedy(inst);
    const auto point = trsp_point(tm, inst, g);
    EXPECT_FALSE(tm.model.first_violation(point).has_value()) << *tm.model.first_violation(point);
    EXPECT_NEAR(tm.model.objective_value(point), static_cast<double>(g.objective), 1e-9);
  }
}
