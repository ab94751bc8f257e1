#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "lp_fixtures.hpp"
#include "trsp/core.hpp"
#include "trsp/lp.hpp"

using namespace trsp::lp;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("trsp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(SolveLp, SingleLowerBoundRow) {
  LinearModel m;
  const int x = m.add_continuous("x", 0, kInf, 1.0);
  m.add_constraint("lb", {{x, 1.0}}, Sense::ge, 3.0);
  const auto s = solve_lp(m);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.primal[x], 3.0, 1e-9);
  EXPECT_NEAR(s.duals[0], 1.0, 1e-9);
  EXPECT_NEAR(s.objective, 3.0, 1e-9);
}

TEST(SolveLp, InfeasiblePair) {
  LinearModel m;
  const int x = m.add_continuous("x", 0, kInf, 1.0);
  m.add_constraint("up", {{x, 1.0}}, Sense::le, 1.0);
  m.add_constraint("lo", {{x, 1.0}}, Sense::ge, 2.0);
  EXPECT_EQ(solve_lp(m).status, Status::infeasible);
}

TEST(SolveLp, Unbounded) {
  LinearModel m;
  const int x = m.add_continuous("x", 0, kInf, -1.0);
  const int y = m.add_continuous("y", 0, kInf, 0.0);
  m.add_constraint("r", {{x, 1.0}, {y, -1.0}}, Sense::le, 1.0);
  EXPECT_EQ(solve_lp(m).status, Status::unbounded);
}

TEST(SolveLp, LeRowsYieldNonpositiveDuals) {
  // max x + y  s.t. x + 2y <= 4, 3x + y <= 6
  LinearModel m;
  const int x = m.add_continuous("x", 0, kInf, -1.0);
  const int y = m.add_continuous("y", 0, kInf, -1.0);
  m.add_constraint("a", {{x, 1.0}, {y, 2.0}}, Sense::le, 4.0);
  m.add_constraint("b", {{x, 3.0}, {y, 1.0}}, Sense::le, 6.0);
  const auto s = solve_lp(m);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.objective, -2.8, 1e-9);
  EXPECT_LE(s.duals[0], 1e-12);
  EXPECT_LE(s.duals[1], 1e-12);
  EXPECT_NEAR(s.duals[0], -0.4, 1e-9);
  EXPECT_NEAR(s.duals[1], -0.2, 1e-9);
}

TEST(SolveLp, BoundedVariablesAndEquality) {
  LinearModel m;
  const int x = m.add_continuous("x", 1, 4, -2.0);
  const int y = m.add_continuous("y", -kInf, 3, 1.0);
  m.add_constraint("e", {{x, 1.0}, {y, 1.0}}, Sense::eq, 2.0);
  const auto s = solve_lp(m);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.primal[x], 4.0, 1e-9);
  EXPECT_NEAR(s.primal[y], -2.0, 1e-9);
  EXPECT_NEAR(s.objective, -10.0, 1e-9);
  EXPECT_NEAR(s.objective, s.dual_objective, 1e-9);
}

TEST(SolveLp, RandomLpsSatisfyDuality) {
  std::mt19937_64 rng(42);
  for (int k = 0; k < 60; ++k) {
    const auto m = trsp::testing::random_lp(rng, 10, 10);
    const auto s = solve_lp(m);
    ASSERT_EQ(s.status, Status::optimal) << "lp " << k;
    const auto report = trsp::testing::check_duality(m, s);
    EXPECT_LE(report.gap, 1e-7) << "lp " << k;
    EXPECT_LE(report.slackness, 1e-7) << "lp " << k;
    EXPECT_LE(report.dual_infeasibility, 1e-7) << "lp " << k;
    EXPECT_LE(report.primal_infeasibility, 1e-6) << "lp " << k;
  }
}

TEST(SolveLp, DegenerateAssignmentLp) {
  // Highly degenerate: 6x6 assignment polytope with equal costs.
  LinearModel m;
  const int n = 6;
  std::vector<int> v;
  for (int i = 0; i < n * n; ++i) v.push_back(m.add_continuous("x" + std::to_string(i), 0, kInf, 1.0));
  for (int i = 0; i < n; ++i) {
    Terms row, col;
    for (int j = 0; j < n; ++j) {
      row.push_back({v[i * n + j], 1.0});
      col.push_back({v[j * n + i], 1.0});
    }
    m.add_constraint("r" + std::to_string(i), row, Sense::eq, 1.0);
    m.add_constraint("c" + std::to_string(i), col, Sense::eq, 1.0);
  }
  const auto s = solve_lp(m);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.objective, 6.0, 1e-9);
}

TEST(SolveMip, KnapsackMatchesEnumeration) {
  LinearModel m;
  const double value[] = {10, 13, 7, 8, 4};
  const double weight[] = {5, 6, 3, 4, 2};
  Terms cap;
  for (int i = 0; i < 5; ++i) {
    const int x = m.add_binary("x" + std::to_string(i), -value[i]);
    cap.push_back({x, weight[i]});
  }
  m.add_constraint("cap", cap, Sense::le, 11.0);
  const auto bb = solve_mip(m);
  const auto ex = enumerate_tiny(m);
  ASSERT_EQ(bb.status, Status::optimal);
  ASSERT_EQ(ex.status, Status::optimal);
  EXPECT_DOUBLE_EQ(bb.objective, ex.objective);
  EXPECT_DOUBLE_EQ(bb.objective, -24.0);  // items 1,2,4: 13+7+4 with weight 11
  EXPECT_DOUBLE_EQ(bb.gap, 0.0);
}

TEST(SolveMip, IntegralRootHasZeroGap) {
  LinearModel m;
  const int a = m.add_binary("a", 1.0);
  const int b = m.add_binary("b", 2.0);
  m.add_constraint("cover", {{a, 1.0}, {b, 1.0}}, Sense::ge, 1.0);
  const auto s = solve_mip(m);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_DOUBLE_EQ(s.objective, 1.0);
  EXPECT_EQ(s.nodes, 1);
  EXPECT_DOUBLE_EQ(s.gap, 0.0);
}

TEST(SolveMip, NoFeasibleBinaryPoint) {
  LinearModel m;
  const int a = m.add_binary("a", 1.0);
  const int b = m.add_binary("b", 1.0);
  m.add_constraint("half", {{a, 2.0}, {b, 2.0}}, Sense::eq, 1.0);
  EXPECT_EQ(solve_mip(m).status, Status::infeasible);
  EXPECT_EQ(enumerate_tiny(m).status, Status::infeasible);
}

TEST(SolveMip, RandomTinyMipsMatchEnumerationAndBoundIsMonotone) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 40; ++k) {
    const auto m = trsp::testing::random_tiny_mip(rng);
    const auto bb = solve_mip(m);
    const auto ex = enumerate_tiny(m);
    ASSERT_EQ(bb.status, ex.status) << "mip " << k;
    if (ex.status != Status::optimal) continue;
    EXPECT_NEAR(bb.objective, ex.objective, 1e-6) << "mip " << k;
    for (std::size_t i = 1; i < bb.bound_trace.size(); ++i) {
      EXPECT_LE(bb.bound_trace[i - 1], bb.bound_trace[i] + 1e-9);
    }
    EXPECT_FALSE(m.first_violation(bb.values).has_value());
  }
}

TEST(SolveMip, IncumbentHintIsKeptWhenOptimal) {
  LinearModel m;
  const int a = m.add_binary("a", 3.0);
  const int b = m.add_binary("b", 2.0);
  m.add_constraint("cover", {{a, 1.0}, {b, 1.0}}, Sense::ge, 1.0);
  MipOptions opt;
  opt.incumbent = std::vector<double>{0.0, 1.0};
  const auto s = solve_mip(m, opt);
  EXPECT_DOUBLE_EQ(s.objective, 2.0);
}

TEST(EnumerateTiny, RejectsTooManyBinaries) {
  LinearModel m;
  for (int i = 0; i < 5; ++i) m.add_binary("b" + std::to_string(i), 1.0);
  EXPECT_THROW(enumerate_tiny(m, 4), trsp::InputError);
}

TEST(Mps, IndependentReaderReproducesMatrix) {
  std::mt19937_64 rng(3);
  const auto m = trsp::testing::random_tiny_mip(rng);
  const auto dir = temp_dir("mps");
  export_mps(m, dir / "m.mps");
  const auto parsed = trsp::testing::read_fixed_mps(dir / "m.mps");
  const auto cn = mangled_column_names(m);
  const auto rn = mangled_row_names(m);
  for (int i = 0; i < m.num_constraints(); ++i) {
    std::map<std::string, double> expect;
    for (const auto& [j, a] : m.constraints()[i].terms) expect[cn[j]] += a;
    EXPECT_EQ(parsed.rows.at(rn[i]), expect) << rn[i];
    EXPECT_DOUBLE_EQ(parsed.rhs.count(rn[i]) ? parsed.rhs.at(rn[i]) : 0.0, m.constraints()[i].rhs);
  }
  for (int j = 0; j < m.num_variables(); ++j) {
    const double c = parsed.cost.count(cn[j]) ? parsed.cost.at(cn[j]) : 0.0;
    EXPECT_DOUBLE_EQ(c, m.variables()[j].cost);
    EXPECT_EQ(parsed.integer.count(cn[j]) > 0, m.variables()[j].type == VarType::binary);
  }
  for (const auto& n : cn) EXPECT_LE(n.size(), 8u);
}

TEST(Mps, ExternalSolutionRoundTripAndTamperedRejection) {
  LinearModel m;
  const int a = m.add_binary("pick_a", 3.0);
  const int b = m.add_binary("pick_b", 2.0);
  m.add_constraint("cover_ab", {{a, 1.0}, {b, 1.0}}, Sense::ge, 1.0);
  const auto best = solve_mip(m);
  const auto dir = temp_dir("ext");
  export_mps(m, dir / "m.mps");
  {
    std::ofstream os(dir / "good.sol");
    const auto cn = mangled_column_names(m);
    for (int j = 0; j < m.num_variables(); ++j) os << cn[j] << ' ' << best.values[j] << '\n';
  }
  const auto read = read_external_solution(m, dir / "good.sol");
  EXPECT_DOUBLE_EQ(read.objective, best.objective);
  {
    std::ofstream os(dir / "bad.sol");
    os << "pick_a 0\npick_b 0\n";
  }
  try {
    read_external_solution(m, dir / "bad.sol");
    FAIL() << "tampered solution accepted";
  } catch (const trsp::InputError& e) {
    EXPECT_NE(std::string(e.what()).find("cover_ab"), std::string::npos);
  }
}

TEST(Mps, ExternalCommandAdapter) {
  LinearModel m;
  const int a = m.add_binary("a", 1.0);
  m.add_constraint("need", {{a, 1.0}}, Sense::ge, 1.0);
  const auto dir = temp_dir("cmd");
  const auto s = solve_external(m, "printf 'C0000001 1\\n' > {sol}", dir);
  EXPECT_DOUBLE_EQ(s.objective, 1.0);
  EXPECT_TRUE(std::filesystem::exists(dir / "model.mps"));
  EXPECT_TRUE(std::filesystem::exists(dir / "model.mps.names"));
}
