#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "trsp/colgen.hpp"
#include "trsp/io.hpp"

using namespace trsp;
using trsp::testing::make_instance;
using trsp::testing::make_master;
using trsp::testing::make_task;

namespace {

const std::vector<std::vector<Minutes>> kThree = {
    {0, 10, 6, 3}, {10, 0, 7, 4}, {6, 7, 0, 5}, {3, 4, 5, 0}};

Instance scarce_instance(std::uint64_t seed) {
  SyntheticParams p;
  p.n_tasks = 12;
  p.n_masters = 3;
  p.n_skills = 4;
  p.skill_probability = 0.35;
  p.min_penalty = 100;
  p.max_penalty = 1500;
  p.shift_end = 840;
  return gen_synthetic(seed, p);
}

InvestmentCatalog catalog_for(const Instance& inst) {
  CatalogOptions opt;
  opt.n_bundles = 2;
  return build_catalog(inst, opt);
}

}  // namespace

TEST(ReducedCost, DirectSubstitution) {
  Column col;
  col.daily = 0;
  col.tasks = {0};
  col.cost = 40;
  Duals d;
  d.alpha = {-10};
  d.nu = {100};
  EXPECT_DOUBLE_EQ(reduced_cost(col, d), -50.0);
  EXPECT_DOUBLE_EQ(reduced_cost(col, Duals{}), 40.0);
}

TEST(ReducedCost, CandidateAddsBetaAndInvestmentDuals) {
  Column col;
  col.daily = 1;
  col.tasks = {0, 2};
  col.overtime = true;
  col.bundles = {3};
  col.cost = 25;
  Duals d;
  d.alpha = {0, -4};
  d.beta = {0, -6};
  d.gamma = {0, -7};
  d.mu[{1, 3}] = -2;
  d.nu = {30, 99, 20};
  EXPECT_DOUBLE_EQ(reduced_cost(col, d), 25.0 + 7 + 2 - 50 + 4 + 6);
}

TEST(SelectTechnicians, DecreasingKeyThenId) {
  const auto inst = make_instance({make_task("A", 0, {0}, 100)},
                                  {make_master("m0", 3, {0}), make_master("m1", 3, {0}), make_master("m2", 3, {0})},
                                  kThree);
  const auto p = make_problem(inst, trsp::testing::empty_catalog());
  Duals d;
  d.alpha = {-9, -5, -5};
  EXPECT_EQ(select_technicians(d, p, 10), (std::vector<int>{1, 2, 0}));
  EXPECT_EQ(select_technicians(d, p, 2), (std::vector<int>{1, 2}));
}

TEST(InitialColumns, EmptyEligibilityGivesOnlyEmptyColumn) {
  const auto inst = make_instance({make_task("A", 0, {1}, 100)}, {make_master("m0", 3, {0})}, kThree);
  const auto p = make_problem(inst, trsp::testing::empty_catalog());
  const auto cols = initial_columns(p);
  ASSERT_EQ(cols.size(), 1u);
  EXPECT_TRUE(cols[0].tasks.empty());
  EXPECT_EQ(cols[0].cost, 0.0);
}

TEST(InitialColumns, ColumnsAreCanonicalAndRebuildable) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = scarce_instance(seed);
    const auto p = make_problem(inst, catalog_for(inst));
    const auto cols = initial_columns(p);
    std::vector<int> seen(inst.tasks.size(), 0);
    for (const auto& c : cols) {
      EXPECT_TRUE(std::is_sorted(c.tasks.begin(), c.tasks.end()));
      EXPECT_GE(c.cost, 0.0);
      EXPECT_FALSE(c.overtime);
      EXPECT_TRUE(c.bundles.empty());
      const auto again = make_column(p, c.daily, c.tasks);
      ASSERT_TRUE(again.has_value());
      EXPECT_EQ(again->cost, c.cost);
      for (int i : c.tasks) ++seen[i];
    }
    for (int s : seen) EXPECT_LE(s, 1);
  }
}

TEST(Master, EmptyColumnsPayCheapestOfPenaltyAndDigitization) {
  auto a = make_task("A", 0, {0}, 300);
  a.digitizable = true;
  const auto inst = make_instance({a, make_task("B", 1, {0}, 200)}, {make_master("m0", 3, {0})}, kThree);
  auto cat = trsp::testing::empty_catalog();
  cat.digitization_cost = {{"A", 120}};
  const auto p = make_problem(inst, cat);
  Column empty;
  const auto ms = build_master({empty}, p);
  const auto lp = lp::solve_lp(ms.model);
  EXPECT_NEAR(lp.objective, 320.0, 1e-9);
}

TEST(Master, UnknownTechnicianRejected) {
  const auto inst = make_instance({make_task("A", 0, {0}, 300)}, {make_master("m0", 3, {0})}, kThree);
  const auto p = make_problem(inst, trsp::testing::empty_catalog());
  Column bad;
  bad.daily = 7;
  EXPECT_THROW(build_master({bad}, p), InputError);
}

TEST(Pricing, ZeroTaskDualsGiveNoColumn) {
  const auto inst = make_instance({make_task("A", 0, {0}, 300)}, {make_master("m0", 3, {0})}, kThree);
  const auto p = make_problem(inst, trsp::testing::empty_catalog());
  Duals d;
  d.alpha = {0};
  d.nu = {0};
  EXPECT_FALSE(price(0, d, p, 3.0).has_value());
}

TEST(Pricing, SingleProfitableTask) {
  // depot -> A is 3 minutes: estimate 5 * 3 = 15.
  const auto inst = make_instance({make_task("A", 0, {0}, 300)}, {make_master("m0", 3, {0})}, kThree);
  const auto p = make_problem(inst, trsp::testing::empty_catalog());
  Duals d;
  d.alpha = {-4};
  d.nu = {19};  // 15 - 19 + 4 = 0 is not negative
  EXPECT_FALSE(price(0, d, p, 3.0).has_value());
  d.nu = {19.1};
  EXPECT_TRUE(price(0, d, p, 3.0).has_value());
  d.nu = {25};
  const auto pr = price(0, d, p, 3.0);
  ASSERT_TRUE(pr.has_value());
  EXPECT_EQ(pr->column.tasks, (std::vector<int>{0}));
  EXPECT_NEAR(pr->objective, 15.0 - 25.0 + 4.0, 1e-9);
  EXPECT_NEAR(reduced_cost(pr->column, d), pr->objective, 1e-9);
}

TEST(Pricing, CandidateUsesBetaConstant) {
  const auto inst = make_instance({make_task("A", 0, {1}, 5000)}, {make_master("m0", 3, {0})}, kThree);
  auto cat = trsp::testing::empty_catalog();
  auto cand = make_master("m0+new", 3, {1});
  cand.is_new_candidate = true;
  cat.new_tech_candidates = {cand};
  cat.new_tech_cost = {1200};
  const auto p = make_problem(inst, cat);
  const int t = p.instance.daily_index("m0+new#0");
  Duals d;
  d.alpha = {0, -1};
  d.beta = {0, -12};
  d.nu = {20};
  EXPECT_FALSE(price(t, d, p, 3.0).has_value());  // 15 - 20 + 1 + 12 > 0
  d.nu = {30};
  const auto pr = price(t, d, p, 3.0);
  ASSERT_TRUE(pr.has_value());
  EXPECT_NEAR(pr->objective, 15.0 - 30.0 + 13.0, 1e-9);
}

TEST(RunColgen, OptimalInitialColumnsStopAtFirstIteration) {
  const auto inst = make_instance({make_task("A", 0, {0}, 1000)}, {make_master("m0", 3, {0})}, kThree);
  const auto r = run_colgen(inst, trsp::testing::empty_catalog());
  EXPECT_EQ(r.iterations, 1);
  EXPECT_TRUE(r.cg_optimal);
  EXPECT_NEAR(r.mip.objective, 15.0, 1e-9);
}

TEST(RunColgen, AuditTraceAndBounds) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto inst = scarce_instance(seed);
    const auto r = run_colgen(inst, catalog_for(inst));
    for (const auto& a : r.audit) {
      EXPECT_NEAR(a.reduced_cost, a.pricing_objective, 1e-6);
      EXPECT_LT(a.reduced_cost, -1e-6);
    }
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
      EXPECT_LE(r.trace[k].lp_objective, r.trace[k - 1].lp_objective) << "seed " << seed << " iteration " << k;
    }
    EXPECT_GE(r.mip.objective, r.lp_objective - 1e-6);
    std::set<std::tuple<int, std::vector<int>, bool, std::vector<int>>> keys;
    for (const auto& c : r.columns) EXPECT_TRUE(keys.insert({c.daily, c.tasks, c.overtime, c.bundles}).second);
  }
}

TEST(RunColgen, SandwichAgainstMonolith) {
  int checked = 0;
  for (std::uint64_t seed = 1; checked < 10 && seed < 60; ++seed) {
    const auto cs = trsp::testing::tiny_invest_case(seed);
    const auto am = build_assignment_invest(cs.instance, cs.catalog);
    if (am.model.num_binaries() > 12) continue;
    const auto mono = lp::enumerate_tiny(am.model, 12);
    const auto r = run_colgen(cs.instance, cs.catalog);
    EXPECT_TRUE(r.cg_optimal);
    EXPECT_LE(r.lp_objective, mono.objective + 1e-6) << "seed " << seed;
    EXPECT_LE(mono.objective, r.mip.objective + 1e-6) << "seed " << seed;
    ++checked;
  }
  EXPECT_EQ(checked, 10);
}

TEST(RunColgen, ZeroBudgetsNeverBeatPlainAssignment) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto inst = scarce_instance(seed);
    const auto plain = solve_assignment(build_assignment(inst));
    const auto r = run_colgen(inst, trsp::testing::zero_budget(catalog_for(inst)));
    EXPECT_GE(r.mip.objective, plain.objective - 1e-6);
    EXPECT_LE(r.lp_objective, plain.objective + 1e-6);
  }
}

TEST(RunColgen, WarmstartRoutesBecomeColumns) {
  const auto inst = make_instance({make_task("A", 0, {0}, 1000), make_task("B", 1, {0}, 1000)},
                                  {make_master("m0", 3, {0})}, kThree);
  Solution warm;
  warm.routes = {make_route(inst, 0, std::vector<int>{0, 1})};
  ColgenConfig cfg;
  cfg.max_iters = 0;
  const auto r = run_colgen(inst, trsp::testing::empty_catalog(), cfg, &warm);
  const bool found = std::any_of(r.columns.begin(), r.columns.end(), [](const Column& c) {
    return c.tasks == std::vector<int>{0, 1} && c.cost == 50.0;
  });
  EXPECT_TRUE(found);
  EXPECT_NEAR(r.mip.objective, 50.0, 1e-9);
}

TEST(LpTrace, CsvHeader) {
  const auto csv = lp_trace_csv({{1, 12.5, 3, 0.25}});
  EXPECT_EQ(csv, "iteration,lp_obj,n_new_cols,seconds\n1,12.500000,3,0.250\n");
}
