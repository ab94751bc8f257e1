#pragma once

// Column generation over the investment assignment model. A column is a task
// set for one daily technician together with the overtime and skill bundles
// it needs; the master picks at most one column per technician and prices
// investments through linking rows.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "trsp/assign.hpp"
#include "trsp/core.hpp"
#include "trsp/io.hpp"
#include "trsp/lp.hpp"

namespace trsp {

struct Column {
  int daily = 0;
  std::vector<int> tasks;    // sorted
  bool overtime = false;
  std::vector<int> bundles;  // sorted catalog bundle indices
  double cost = 0.0;

  auto key() const { return std::tie(daily, tasks, overtime, bundles); }
};

/// Instance with candidates, catalog and per-technician options shared by the
/// master and the pricing problems.
struct ColgenProblem {
  Instance instance;
  InvestmentCatalog catalog;
  std::vector<TechOptions> techs;  // parallel to instance.dailies
  double k = kDefaultTravelScale;
};

ColgenProblem make_problem(const Instance& instance, const InvestmentCatalog& catalog,
                           double k = kDefaultTravelScale);

/// Completes overtime, bundles and cost from the task set. Returns nullopt
/// when the tasks cannot form a column for that technician.
std::optional<Column> make_column(const ColgenProblem& problem, int daily, std::vector<int> tasks);

/// Greedy packing per routing technician without investments, plus one empty
/// column per technician.
std::vector<Column> initial_columns(const ColgenProblem& problem);

struct Master {
  lp::LinearModel model;
  std::vector<int> column_vars;  // parallel to the columns
  std::vector<int> y;            // per task, -1 for digitized tasks
  std::map<int, int> u_ot;       // daily
  std::map<int, int> u_dig;      // task
  std::map<std::pair<int, int>, int> u_skill;  // (master, bundle)
  std::map<int, int> u_nt;       // candidate master
  // Row indices, -1 where a row does not exist.
  std::vector<int> alpha;  // per daily: at most one column
  std::vector<int> beta;   // per daily: new technician linkage
  std::vector<int> gamma;  // per daily: overtime linkage
  std::map<std::pair<int, int>, int> mu;  // (daily, bundle): skill linkage
  std::vector<int> nu;     // per task: coverage
};

/// Rows are added in the order alpha, beta, gamma, mu, nu, budgets. With
/// `integral` the column and investment variables are binary.
Master build_master(const std::vector<Column>& columns, const ColgenProblem& problem,
                    bool integral = false);

struct Duals {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> gamma;
  std::map<std::pair<int, int>, double> mu;
  std::vector<double> nu;
};

/// Throws InternalError when a dual has the wrong sign beyond tolerance.
Duals extract_duals(const Master& master, const lp::LpSolution& lp);

double reduced_cost(const Column& column, const Duals& duals);

struct Pricing {
  Column column;
  double objective = 0.0;  // pricing objective including the constant term
};

/// Single-technician pricing problem. Returns a column only when its reduced
/// cost is below neg_tol.
std::optional<Pricing> price(int daily, const Duals& duals, const ColgenProblem& problem,
                             double time_limit_seconds, double neg_tol = -1e-6);

/// Daily technicians by nonincreasing alpha dual (plus beta for candidates),
/// ties by id, at most `cap` of them.
std::vector<int> select_technicians(const Duals& duals, const ColgenProblem& problem,
                                    std::size_t cap);

struct ColgenConfig {
  int max_iters = 75;
  std::size_t global_cap = std::numeric_limits<std::size_t>::max();
  double subproblem_time = 3.0;
  double master_lp_time = 30.0;
  double final_ip_time = 60.0;
  double neg_tol = -1e-6;
  double k = kDefaultTravelScale;
};

/// 500 priced technicians per iteration, 120 s master LP, 1200 s final IP.
ColgenConfig large_profile();

struct LpTracePoint {
  int iteration = 0;
  double lp_objective = 0.0;
  int new_columns = 0;
  double seconds = 0.0;
};

struct PricingAudit {
  int iteration = 0;
  int daily = 0;
  double pricing_objective = 0.0;
  double reduced_cost = 0.0;
};

struct ColgenResult {
  ColgenProblem problem;
  std::vector<Column> columns;
  std::vector<LpTracePoint> trace;
  std::vector<PricingAudit> audit;
  bool cg_optimal = false;
  int iterations = 0;
  double lp_objective = 0.0;
  Master master;  // integral master over all columns
  lp::MipSolution mip;
  double seconds = 0.0;
};

/// `warmstart` routes (over the instance without candidates) become columns
/// before the first iteration.
ColgenResult run_colgen(const Instance& instance, const InvestmentCatalog& catalog,
                        const ColgenConfig& config = {}, const Solution* warmstart = nullptr);

std::string lp_trace_csv(const std::vector<LpTracePoint>& trace);

}  // namespace trsp
