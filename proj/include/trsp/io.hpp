#pragma once

// Instance ingestion and generation, investment catalogs, and result files.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trsp/core.hpp"

namespace trsp {

// ---------------------------------------------------------------------------
// Canonical instance files (JSON)

/// Reads and validates a canonical instance. Triangle-inequality breaches
/// are reported through `warnings` rather than rejected.
Instance parse_canonical(const std::filesystem::path& path,
                         std::vector<std::string>* warnings = nullptr);
Instance parse_canonical_text(const std::string& text, std::vector<std::string>* warnings = nullptr);
std::string canonical_text(const Instance& instance);
void write_canonical(const Instance& instance, const std::filesystem::path& path);

/// Reads the line-record layout of the literature benchmark set (see README):
/// drops tools and distances, fixes technician hours to 9-17 and splits
/// multi-window tasks into one task per window.
Instance import_mathlouthi(const std::filesystem::path& path);
Instance import_mathlouthi_text(const std::string& text);

/// Ceil of the Euclidean distance, exact for integral coordinates.
Minutes euclidean_minutes(double x1, double y1, double x2, double y2);

// ---------------------------------------------------------------------------
// Synthetic instances

enum class Geometry { uniform, clustered };
enum class WindowStyle { narrow, wide };

struct SyntheticParams {
  int n_tasks = 20;
  int n_masters = 3;
  int n_days = 1;
  int n_skills = 3;
  Geometry geometry = Geometry::uniform;
  WindowStyle window_style = WindowStyle::wide;
  int area = 60;           // coordinates in [0, area]
  int n_clusters = 3;      // clustered geometry only
  int cluster_spread = 6;  // clustered geometry only
  Minutes shift_start = 540;
  Minutes shift_end = 1020;
  Minutes min_duration = 20;
  Minutes max_duration = 90;
  Minutes min_penalty = 100;
  Minutes max_penalty = 400;
  double skill_probability = 0.5;  // chance a master holds each skill
  bool ensure_capable = true;      // every task skill held by some master
  Minutes travel_cap = 100;
};

struct SyntheticInstance {
  Instance instance;
  std::vector<int> task_cluster;  // -1 for uniform geometry
};

SyntheticInstance generate_synthetic(std::uint64_t seed, const SyntheticParams& params);
Instance gen_synthetic(std::uint64_t seed, const SyntheticParams& params);

// ---------------------------------------------------------------------------
// Investment catalog

enum class CatalogProfile { mathlouthi, tdc };
enum class NewTechCharging { per_day, per_master_once };

struct SkillBundle {
  std::string name;
  SkillSet skills;
  Minutes cost = 0;  // per master technician upgraded
};

struct InvestmentBudgets {
  std::optional<int> overtime;
  std::optional<int> digitization;
  std::optional<int> skill;
  std::optional<int> new_tech;
};

struct InvestmentCatalog {
  Minutes overtime_minutes = 120;
  Minutes overtime_cost = 450;
  std::vector<MasterTechnician> new_tech_candidates;
  std::vector<Minutes> new_tech_cost;  // parallel to new_tech_candidates
  std::vector<SkillBundle> skill_bundles;
  std::map<std::string, Minutes> digitization_cost;  // digitizable task id -> cost
  InvestmentBudgets budgets;
  NewTechCharging charging = NewTechCharging::per_day;
};

/// Purchased investments, by id. Skill upgrades are (master id, bundle index).
struct InvestmentDecision {
  std::set<std::string> overtime_dailies;
  std::set<std::string> new_masters;
  std::set<std::pair<std::string, int>> skill_upgrades;
  std::set<std::string> digitized_tasks;

  bool empty() const {
    return overtime_dailies.empty() && new_masters.empty() && skill_upgrades.empty() && digitized_tasks.empty();
  }
  friend bool operator==(const InvestmentDecision&, const InvestmentDecision&) = default;
};

/// Cost constants in travel-time minutes (EUR 1 = 5 minutes).
namespace cost {
inline constexpr Minutes kOvertimeMinutes = 120;
inline constexpr Minutes kOvertime = 450;
inline constexpr Minutes kDigitizationMathlouthi = 2500;
inline constexpr Minutes kDigitizationTdc = 500;
inline constexpr Minutes kNewTechPerDay = 1200;
inline constexpr Minutes kSkillUpgradePerDay = 35;
}  // namespace cost

struct CatalogOptions {
  CatalogProfile profile = CatalogProfile::mathlouthi;
  int n_bundles = 0;  // 0 = profile default (5 mathlouthi, 10 tdc), capped at |S|
  std::uint64_t seed = 1;
  NewTechCharging charging = NewTechCharging::per_day;
  // tdc profile: tasks requiring one of these skills may be digitized.
  std::vector<std::string> digitizable_skills = {"ADSL.I",  "ADSL.S", "ISDN2.I", "ISDN2.S",
                                                 "PSTN.I",  "PSTN.S", "SHDSL"};
  InvestmentBudgets budgets;
};

InvestmentCatalog build_catalog(const Instance& instance, const CatalogOptions& options = {});

/// Instance with the catalog's new-technician candidates appended as masters
/// (flagged is_new_candidate) and daily technicians rebuilt.
Instance with_candidates(const Instance& instance, const InvestmentCatalog& catalog);

/// Incidence vector of each skill over the hired daily technicians.
std::vector<std::vector<int>> skill_incidence(const Instance& instance);

/// |T| minus the number of daily technicians holding both skills.
int skill_distance(const Instance& instance, SkillId a, SkillId b);

/// k-means (k-means++ seeding, at most 100 Lloyd iterations) over skill
/// incidence vectors. Returns a partition of the skill set into k bundles.
std::vector<SkillSet> kmeans_skill_bundles(const Instance& instance, int k, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Results

std::string solution_text(const Solution& solution);
void write_solution(const Solution& solution, const std::filesystem::path& path);
Solution read_solution(const std::filesystem::path& path);

struct ReportRow {
  std::string instance_id;
  Minutes obj_noinv = 0;
  Minutes obj_inv = 0;
  Minutes capex_total = 0;
  Minutes capex_ot = 0;
  Minutes capex_dig = 0;
  Minutes capex_skill = 0;
  Minutes capex_nt = 0;
  Minutes business_case = 0;
  int unserved_noinv = 0;
  int unserved_inv = 0;
  Minutes travel_noinv = 0;
  Minutes travel_inv = 0;
  int cg_iters = 0;
  bool cg_optimal = false;
  double seconds_assm = 0.0;
  double seconds_alns = 0.0;
};

struct Report {
  std::vector<ReportRow> rows;
};

inline constexpr const char* kReportHeader =
    "instance_id,obj_noinv,obj_inv,capex_total,capex_ot,capex_dig,capex_skill,capex_nt,"
    "business_case,unserved_noinv,unserved_inv,travel_noinv,travel_inv,cg_iters,cg_optimal,"
    "seconds_assm,seconds_alns";

/// CSV in fixed column order. Throws InternalError if a row breaks
/// business_case = obj_noinv - obj_inv - capex_total.
std::string report_csv(const Report& report);
void write_report(const Report& report, const std::filesystem::path& path);

/// (id, value) pairs sorted by nonincreasing value, ties by id.
std::string duration_curve_csv(std::vector<std::pair<std::string, double>> values,
                               const std::string& value_name);
void write_duration_curve(std::vector<std::pair<std::string, double>> values,
                          const std::string& value_name, const std::filesystem::path& path);

}  // namespace trsp
