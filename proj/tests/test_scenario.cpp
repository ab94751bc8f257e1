#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "trsp/scenario.hpp"

using namespace trsp;
using trsp::testing::make_instance;
using trsp::testing::make_master;
using trsp::testing::make_task;

namespace {

const std::vector<std::vector<Minutes>> kThree = {
    {0, 10, 6, 3}, {10, 0, 7, 4}, {6, 7, 0, 5}, {3, 4, 5, 0}};

// 20 masters, 5 bundles at 175, 6 candidates charged once, 7 digitizable tasks.
InvestmentCatalog tdc_like_catalog() {
  InvestmentCatalog cat;
  cat.charging = NewTechCharging::per_master_once;
  for (int b = 0; b < 5; ++b) cat.skill_bundles.push_back({"b" + std::to_string(b), {b}, 5 * cost::kSkillUpgradePerDay});
  for (int k = 0; k < 6; ++k) {
    cat.new_tech_candidates.push_back(make_master("m" + std::to_string(k) + "+new", 0, {0}));
    cat.new_tech_cost.push_back(cost::kNewTechPerDay);
  }
  for (int i = 0; i < 7; ++i) cat.digitization_cost["t" + std::to_string(i)] = cost::kDigitizationTdc;
  return cat;
}

InvestmentDecision tdc_like_decision() {
  InvestmentDecision d;
  for (int m = 0; m < 19; ++m) {
    for (int b = 0; b < 5; ++b) d.skill_upgrades.insert({"m" + std::to_string(m), b});
  }
  for (int k = 0; k < 6; ++k) d.new_masters.insert("m" + std::to_string(k) + "+new");
  for (int i = 0; i < 7; ++i) d.digitized_tasks.insert("t" + std::to_string(i));
  for (int t = 0; t < 35; ++t) d.overtime_dailies.insert("m" + std::to_string(t % 20) + "#" + std::to_string(t / 20));
  return d;
}

Instance scarce(std::uint64_t seed) {
  SyntheticParams p;
  p.n_tasks = 12;
  p.n_masters = 2;
  p.n_skills = 4;
  p.skill_probability = 0.35;
  p.min_penalty = 200;
  p.max_penalty = 1500;
  p.shift_end = 840;
  return gen_synthetic(seed, p);
}

PipelineConfig quick_config() {
  PipelineConfig c;
  c.alns.retries = 1;
  c.alns.iterations_per_retry = 300;
  c.alns.seconds_per_retry = 30;
  c.record_seconds = false;
  return c;
}

}  // namespace

TEST(BusinessCase, WorkedNumbers) {
  EXPECT_EQ(business_case(441858, 183977, 43075), 214806);
  EXPECT_EQ(business_case(500, 500, 0), 0);
  EXPECT_EQ(business_case(500, 450, 80), -30);
}

TEST(Capex, TdcDecomposition) {
  const auto c = capex_breakdown(tdc_like_decision(), tdc_like_catalog());
  EXPECT_EQ(c.skill, 16625);
  EXPECT_EQ(c.new_tech, 7200);
  EXPECT_EQ(c.digitization, 3500);
  EXPECT_EQ(c.overtime, 15750);
  EXPECT_EQ(c.total(), 43075);
  EXPECT_EQ(capex(InvestmentDecision{}, tdc_like_catalog()), 0);
}

TEST(Capex, UnknownDigitizationRejected) {
  InvestmentDecision d;
  d.digitized_tasks = {"nope"};
  EXPECT_THROW(capex(d, tdc_like_catalog()), InputError);
}

TEST(ApplyInvestments, EmptyDecisionLeavesInstanceUnchanged) {
  const auto inst = scarce(3);
  const auto cat = build_catalog(inst);
  EXPECT_EQ(apply_investments(inst, {}, cat), inst);
}

TEST(ApplyInvestments, OvertimeGrowsCapacityOnceAndIsIdempotent) {
  const auto inst = scarce(3);
  const auto cat = build_catalog(inst);
  InvestmentDecision d;
  d.overtime_dailies = {inst.dailies[0].id};
  const auto once = apply_investments(inst, d, cat);
  EXPECT_EQ(once.dailies[0].capacity, inst.dailies[0].capacity + 120);
  EXPECT_EQ(once.dailies[0].window.end, inst.dailies[0].window.end + 120);
  EXPECT_EQ(apply_investments(once, d, cat), once);
}

TEST(ApplyInvestments, SkillsHiresAndDigitization) {
  const auto inst = scarce(5);
  CatalogOptions opt;
  opt.n_bundles = 2;
  const auto cat = build_catalog(inst, opt);
  InvestmentDecision d;
  d.skill_upgrades = {{inst.masters[0].id, 1}};
  d.new_masters = {cat.new_tech_candidates[1].id};
  d.digitized_tasks = {inst.tasks[0].id};
  const auto out = apply_investments(inst, d, cat);
  EXPECT_TRUE(is_subset(cat.skill_bundles[1].skills, out.masters[0].skills));
  const auto& hired = out.masters.back();
  EXPECT_EQ(hired.id, cat.new_tech_candidates[1].id);
  EXPECT_FALSE(hired.is_new_candidate);
  EXPECT_FALSE(routing_dailies(out).empty());
  EXPECT_EQ(routing_dailies(out).size(), routing_dailies(inst).size() + 1);
  EXPECT_TRUE(out.tasks[0].digitized);
  EXPECT_EQ(apply_investments(out, d, cat), out);

  AlnsConfig ac;
  ac.retries = 1;
  ac.iterations_per_retry = 200;
  const auto sol = run_alns(out, ac).best;
  EXPECT_EQ(std::count(sol.digitized.begin(), sol.digitized.end(), inst.tasks[0].id), 1);
  EXPECT_EQ(solution_objective(sol, out), sol.objective);
  EXPECT_EQ(std::count(sol.unserved.begin(), sol.unserved.end(), inst.tasks[0].id), 0);
}

TEST(ApplyInvestments, UnknownEntitiesRejected) {
  const auto inst = scarce(5);
  const auto cat = build_catalog(inst);
  InvestmentDecision d;
  d.new_masters = {"ghost"};
  EXPECT_THROW(apply_investments(inst, d, cat), InputError);
  d = {};
  d.overtime_dailies = {"ghost#0"};
  EXPECT_THROW(apply_investments(inst, d, cat), InputError);
}

TEST(ExtractInvestments, CapexMatchesMasterInvestmentTerm) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto inst = scarce(seed);
    CatalogOptions opt;
    opt.n_bundles = 2;
    const auto cat = build_catalog(inst, opt);
    const auto cg = run_colgen(inst, cat);
    const auto d = extract_investments(cg.master, cg.problem, cg.mip.values);
    const auto& vars = cg.master.model.variables();
    double term = 0;
    auto add = [&](const auto& map) {
      for (const auto& [key, var] : map) term += vars[var].cost * cg.mip.values[var];
    };
    add(cg.master.u_ot);
    add(cg.master.u_dig);
    add(cg.master.u_skill);
    add(cg.master.u_nt);
    EXPECT_NEAR(static_cast<double>(capex(d, cat)), term, 1e-6);
  }
}

TEST(ExtractInvestments, ZeroPointIsEmpty) {
  const auto inst = scarce(2);
  const auto cat = build_catalog(inst);
  const auto p = make_problem(inst, cat);
  const auto ms = build_master(initial_columns(p), p, true);
  EXPECT_TRUE(extract_investments(ms, p, std::vector<double>(ms.model.num_variables(), 0.0)).empty());
}

TEST(Pipeline, ReportIdentityAndDeterminism) {
  const auto inst = scarce(7);
  CatalogOptions opt;
  opt.n_bundles = 2;
  const auto cat = build_catalog(inst, opt);
  const auto a = run_pipeline(inst, cat, quick_config());
  const auto& row = a.row;
  EXPECT_EQ(row.business_case, row.obj_noinv - row.obj_inv - row.capex_total);
  EXPECT_EQ(row.capex_total, row.capex_ot + row.capex_dig + row.capex_skill + row.capex_nt);
  EXPECT_EQ(row.obj_inv, solution_objective(a.inv, a.invested));
  EXPECT_LE(row.obj_inv, row.obj_noinv);
  const auto b = run_pipeline(inst, cat, quick_config());
  EXPECT_EQ(report_csv({{a.row}}), report_csv({{b.row}}));
}

TEST(Pipeline, ZeroBudgetsBuyNothing) {
  const auto inst = scarce(8);
  const auto cat = trsp::testing::zero_budget(build_catalog(inst));
  const auto r = run_pipeline(inst, cat, quick_config());
  EXPECT_TRUE(r.decision.empty());
  EXPECT_EQ(r.row.capex_total, 0);
  EXPECT_EQ(r.row.business_case, r.row.obj_noinv - r.row.obj_inv);
}
