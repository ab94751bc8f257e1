#pragma once

// Investment pipeline: plan without investments, choose investments with
// column generation, apply them and plan again, then account for the cost.

#include <cstdint>
#include <string>
#include <vector>

#include "trsp/alns.hpp"
#include "trsp/colgen.hpp"
#include "trsp/core.hpp"
#include "trsp/io.hpp"

namespace trsp {

/// Investment variables at 1 in an integral master point. Throws
/// InternalError on fractional values.
InvestmentDecision extract_investments(const Master& master, const ColgenProblem& problem,
                                       const std::vector<double>& values);

/// Instance with the decision applied: overtime extends the chosen daily
/// windows, hired candidates become regular masters, upgraded masters gain
/// the bundle skills and digitized tasks are flagged (no visit, no penalty).
/// Applying the same decision twice changes nothing further. Throws
/// InputError when the decision names unknown entities.
Instance apply_investments(const Instance& instance, const InvestmentDecision& decision,
                           const InvestmentCatalog& catalog);

struct Capex {
  Minutes overtime = 0;
  Minutes digitization = 0;
  Minutes skill = 0;
  Minutes new_tech = 0;
  Minutes total() const { return overtime + digitization + skill + new_tech; }
};

Capex capex_breakdown(const InvestmentDecision& decision, const InvestmentCatalog& catalog);
Minutes capex(const InvestmentDecision& decision, const InvestmentCatalog& catalog);

/// Savings net of investment: obj_noinv - obj_inv - capex.
constexpr Minutes business_case(Minutes obj_noinv, Minutes obj_inv, Minutes capex_total) {
  return obj_noinv - obj_inv - capex_total;
}

struct PipelineConfig {
  AlnsConfig alns;
  ColgenConfig colgen;
  bool setcover = true;
  double setcover_seconds = 60.0;
  bool warmstart = true;
  std::uint64_t seed = 1;
  bool record_seconds = true;  // false zeroes the timing columns
};

struct PipelineResult {
  ReportRow row;
  InvestmentDecision decision;
  Solution noinv;
  Solution inv;
  Instance invested;
  std::uint64_t seed_noinv = 0;
  std::uint64_t seed_inv = 0;
  std::vector<LpTracePoint> lp_trace;
};

PipelineResult run_pipeline(const Instance& instance, const InvestmentCatalog& catalog,
                            const PipelineConfig& config = {});

/// Pipeline over several instances, one report row each.
Report run_pipeline(const std::vector<Instance>& instances, const std::vector<InvestmentCatalog>& catalogs,
                    const PipelineConfig& config = {});

}  // namespace trsp
