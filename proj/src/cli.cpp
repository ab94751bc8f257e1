#include "trsp/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <optional>

#include "trsp/alns.hpp"
#include "trsp/assign.hpp"
#include "trsp/colgen.hpp"
#include "trsp/io.hpp"
#include "trsp/lp.hpp"
#include "trsp/scenario.hpp"
#include "trsp/trsp_mip.hpp"

namespace trsp {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr const char* kExternalSolverEnv = "TRSP_EXTERNAL_SOLVER";

struct Common {
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  bool deterministic = false;
};

struct CatalogFlags {
  std::string profile = "mathlouthi";
  int bundles = 0;
  std::string charging = "per-day";
  std::optional<int> budget_ot, budget_dig, budget_skill, budget_nt;
  double k = kDefaultTravelScale;
  std::optional<Minutes> travel_cap;
};

struct AlnsFlags {
  int retries = 3;
  double seconds = 100.0;
  std::int64_t iterations = 0;
  bool no_setcover = false;
};

struct ColgenFlags {
  std::string profile = "default";
  int max_iters = 75;
  std::size_t cols_per_iter = 0;
  double subproblem_time = 3.0;
  double master_time = 0.0;
  double final_ip_time = 0.0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out-dir", c.out_dir, "Directory for every output file")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Seed for all randomness")->capture_default_str();
  cmd->add_flag("--deterministic", c.deterministic,
                "Iteration budgets instead of wall-clock limits; timing columns written as 0");
}

void add_catalog(CLI::App* cmd, CatalogFlags& f) {
  cmd->add_option("--catalog", f.profile, "Investment cost profile")
      ->check(CLI::IsMember({"mathlouthi", "tdc"}))
      ->capture_default_str();
  cmd->add_option("--bundles", f.bundles, "Skill bundles (0 = profile default)")->capture_default_str();
  cmd->add_option("--charging", f.charging, "New technician charging")
      ->check(CLI::IsMember({"per-day", "once"}))
      ->capture_default_str();
  cmd->add_option("--budget-ot", f.budget_ot, "Maximum overtime purchases");
  cmd->add_option("--budget-dig", f.budget_dig, "Maximum digitized tasks");
  cmd->add_option("--budget-skill", f.budget_skill, "Maximum skill upgrades");
  cmd->add_option("--budget-nt", f.budget_nt, "Maximum new technicians");
  cmd->add_option("--k", f.k, "Travel estimate scaling factor")->capture_default_str();
  cmd->add_option("--travel-cap", f.travel_cap, "Override the instance's depot travel cap (default 100)");
}

void add_alns(CLI::App* cmd, AlnsFlags& f) {
  cmd->add_option("--retries", f.retries, "ALNS retries")->capture_default_str();
  cmd->add_option("--seconds", f.seconds, "Seconds per ALNS retry")->capture_default_str();
  cmd->add_option("--iterations", f.iterations, "Iterations per retry (0 = time only)")->capture_default_str();
  cmd->add_flag("--no-setcover", f.no_setcover, "Skip the set-cover recombination");
}

void add_colgen(CLI::App* cmd, ColgenFlags& f) {
  cmd->add_option("--profile", f.profile, "Parameter preset")
      ->check(CLI::IsMember({"default", "large"}))
      ->capture_default_str();
  cmd->add_option("--max-iters", f.max_iters, "Column generation iterations")->capture_default_str();
  cmd->add_option("--cols-per-iter", f.cols_per_iter, "Technicians priced per iteration (0 = all, 500 for large)");
  cmd->add_option("--subproblem-time", f.subproblem_time, "Seconds per pricing problem")->capture_default_str();
  cmd->add_option("--master-time", f.master_time, "Seconds per master LP (0 = profile default: 30, large 120)");
  cmd->add_option("--final-ip-time", f.final_ip_time, "Seconds for the integer master (0 = profile default: 60, large 1200)");
}

Instance load_instance(const std::string& path, std::ostream& err, const CatalogFlags* cat = nullptr) {
  std::vector<std::string> warnings;
  Instance inst = parse_canonical(path, &warnings);
  for (const auto& w : warnings) err << "warning: " << path << ": " << w << '\n';
  if (cat && cat->travel_cap) {
    if (*cat->travel_cap < 0) throw InputError("--travel-cap must be nonnegative");
    inst.travel_cap = *cat->travel_cap;
  }
  return inst;
}

InvestmentCatalog make_catalog(const Instance& inst, const CatalogFlags& f, std::uint64_t seed) {
  CatalogOptions opt;
  opt.profile = f.profile == "tdc" ? CatalogProfile::tdc : CatalogProfile::mathlouthi;
  opt.n_bundles = f.bundles;
  opt.seed = seed;
  opt.charging = f.charging == "once" ? NewTechCharging::per_master_once : NewTechCharging::per_day;
  opt.budgets = {f.budget_ot, f.budget_dig, f.budget_skill, f.budget_nt};
  return build_catalog(inst, opt);
}

AlnsConfig make_alns(const AlnsFlags& f, const Common& c) {
  AlnsConfig a;
  a.retries = f.retries;
  a.seconds_per_retry = f.seconds;
  a.iterations_per_retry = f.iterations;
  a.seed = c.seed;
  if (c.deterministic) {
    if (a.iterations_per_retry <= 0) a.iterations_per_retry = 5000;
    a.seconds_per_retry = std::numeric_limits<double>::infinity();
  }
  validate_config(a);
  return a;
}

ColgenConfig make_colgen(const ColgenFlags& f, double k) {
  ColgenConfig c = f.profile == "large" ? large_profile() : ColgenConfig{};
  c.max_iters = f.max_iters;
  if (f.cols_per_iter > 0) c.global_cap = f.cols_per_iter;
  c.subproblem_time = f.subproblem_time;
  if (f.master_time > 0) c.master_lp_time = f.master_time;
  if (f.final_ip_time > 0) c.final_ip_time = f.final_ip_time;
  c.k = k;
  return c;
}

fs::path prepare(const Common& c) {
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + c.out_dir + "': " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << text;
}

ordered_json decision_json(const InvestmentDecision& d, const InvestmentCatalog& cat) {
  ordered_json j;
  j["overtime"] = d.overtime_dailies;
  j["new_masters"] = d.new_masters;
  ordered_json ups = ordered_json::array();
  for (const auto& [m, b] : d.skill_upgrades) ups.push_back({{"master", m}, {"bundle", b}});
  j["skill_upgrades"] = std::move(ups);
  j["digitized"] = d.digitized_tasks;
  const Capex c = capex_breakdown(d, cat);
  j["capex"] = {{"overtime", c.overtime},
                {"digitization", c.digitization},
                {"skill", c.skill},
                {"new_tech", c.new_tech},
                {"total", c.total()}};
  return j;
}

ordered_json assignment_json(const Assignment& a, const Instance& inst, const InvestmentCatalog* cat) {
  ordered_json j;
  j["objective"] = a.objective;
  j["status"] = lp::to_string(a.status);
  ordered_json techs = ordered_json::object();
  for (const auto& [t, tasks] : a.tasks) {
    ordered_json ids = ordered_json::array();
    for (int i : tasks) ids.push_back(inst.tasks[i].id);
    techs[inst.dailies[t].id] = std::move(ids);
  }
  j["assignments"] = std::move(techs);
  ordered_json un = ordered_json::array();
  for (int i : a.unserved) un.push_back(inst.tasks[i].id);
  j["unserved"] = std::move(un);
  if (cat) j["investments"] = decision_json(a.decision, *cat);
  return j;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

int dispatch(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
  CLI::App app{"Technician routing with strategic investments", "trsp"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Help for every command");

  Common common;
  CatalogFlags catf;
  AlnsFlags alnsf;
  ColgenFlags cgf;

  // gen
  auto* gen = app.add_subcommand("gen", "Write seeded synthetic instances");
  SyntheticParams sp;
  int count = 1;
  std::string geometry = "uniform", windows = "wide", preset = "none";
  add_common(gen, common);
  gen->add_option("--count", count, "Number of instances (seeds seed .. seed+count-1)")->capture_default_str();
  gen->add_option("--preset", preset, "scarce: high penalties, short days, few skills per technician")
      ->check(CLI::IsMember({"none", "scarce"}))
      ->capture_default_str();
  gen->add_option("--n-tasks", sp.n_tasks, "Tasks")->capture_default_str();
  gen->add_option("--n-masters", sp.n_masters, "Master technicians")->capture_default_str();
  gen->add_option("--n-days", sp.n_days, "Horizon days")->capture_default_str();
  gen->add_option("--n-skills", sp.n_skills, "Skills")->capture_default_str();
  gen->add_option("--geometry", geometry, "Task locations")
      ->check(CLI::IsMember({"uniform", "clustered"}))
      ->capture_default_str();
  gen->add_option("--windows", windows, "Task time windows")->check(CLI::IsMember({"wide", "narrow"}))->capture_default_str();
  gen->add_option("--area", sp.area, "Coordinate range")->capture_default_str();
  gen->add_option("--min-penalty", sp.min_penalty, "Smallest penalty")->capture_default_str();
  gen->add_option("--max-penalty", sp.max_penalty, "Largest penalty")->capture_default_str();
  gen->add_option("--travel-cap", sp.travel_cap, "Depot travel cap")->capture_default_str();

  // import-mathlouthi
  auto* imp = app.add_subcommand("import-mathlouthi", "Convert a benchmark instance to the canonical format");
  std::string import_path;
  add_common(imp, common);
  imp->add_option("file", import_path, "Benchmark instance file")->required()->check(CLI::ExistingFile);

  std::string instance_path;
  auto add_instance = [&](CLI::App* cmd) {
    cmd->add_option("instance", instance_path, "Canonical instance file")->required()->check(CLI::ExistingFile);
  };

  // solve-mip
  auto* mip = app.add_subcommand("solve-mip", "Solve the exact routing model");
  double mip_time = 60.0;
  bool external = false;
  add_common(mip, common);
  add_instance(mip);
  mip->add_option("--time-limit", mip_time, "Seconds")->capture_default_str();
  mip->add_flag("--external", external,
                std::string("Solve with the command template in $") + kExternalSolverEnv + " ({mps}, {sol})");

  // solve-alns
  auto* alns = app.add_subcommand("solve-alns", "Solve with adaptive large neighborhood search");
  add_common(alns, common);
  add_instance(alns);
  add_alns(alns, alnsf);

  // solve-assign
  auto* asg = app.add_subcommand("solve-assign", "Solve the monolithic assignment model");
  bool with_invest = false;
  double asg_time = 60.0;
  add_common(asg, common);
  add_instance(asg);
  add_catalog(asg, catf);
  asg->add_flag("--invest", with_invest, "Include investments");
  asg->add_option("--time-limit", asg_time, "Seconds")->capture_default_str();

  // invest
  auto* inv = app.add_subcommand("invest", "Choose investments by column generation");
  std::string warm_path;
  add_common(inv, common);
  add_instance(inv);
  add_catalog(inv, catf);
  add_colgen(inv, cgf);
  inv->add_option("--warmstart", warm_path, "Solution file whose routes seed the master")->check(CLI::ExistingFile);

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Plan, invest, re-plan and report the business case");
  std::vector<std::string> pipe_paths;
  int jobs = 1;
  bool no_warm = false;
  add_common(pipe, common);
  pipe->add_option("instances", pipe_paths, "Canonical instance files")->required()->check(CLI::ExistingFile);
  add_catalog(pipe, catf);
  add_alns(pipe, alnsf);
  add_colgen(pipe, cgf);
  pipe->add_option("--jobs", jobs, "Instances solved concurrently")->capture_default_str()->check(CLI::PositiveNumber);
  pipe->add_flag("--no-warmstart", no_warm, "Do not seed column generation with the plan without investments");

  // export-mps
  auto* mps = app.add_subcommand("export-mps", "Write a model in MPS format");
  std::string which = "trsp";
  add_common(mps, common);
  add_instance(mps);
  add_catalog(mps, catf);
  mps->add_option("--model", which, "Model to export")
      ->check(CLI::IsMember({"trsp", "assign", "invest"}))
      ->capture_default_str();

  std::vector<std::string> args(raw.rbegin(), raw.rend());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  if (*gen) {
    sp.geometry = geometry == "clustered" ? Geometry::clustered : Geometry::uniform;
    sp.window_style = windows == "narrow" ? WindowStyle::narrow : WindowStyle::wide;
    if (preset == "scarce") {
      sp.n_skills = std::max(sp.n_skills, 4);
      sp.skill_probability = 0.3;
      sp.min_penalty = 1000;
      sp.max_penalty = 3000;
      sp.shift_end = 840;
    }
    if (count < 1) throw InputError("--count must be positive");
    const auto dir = prepare(common);
    for (int k = 0; k < count; ++k) {
      const std::uint64_t seed = common.seed + static_cast<std::uint64_t>(k);
      Instance inst = gen_synthetic(seed, sp);
      inst.name = "gen_" + std::to_string(seed);
      write_canonical(inst, dir / (inst.name + ".json"));
      out << (dir / (inst.name + ".json")).string() << '\n';
    }
    return 0;
  }
  if (*imp) {
    const auto dir = prepare(common);
    Instance inst = import_mathlouthi(import_path);
    inst.name = stem_of(import_path);
    write_canonical(inst, dir / (inst.name + ".json"));
    out << inst.name << ": " << inst.tasks.size() << " tasks, " << inst.masters.size() << " technicians\n";
    return 0;
  }
  if (*mip) {
    const auto dir = prepare(common);
    const Instance inst = load_instance(instance_path, err);
    Solution sol;
    std::string status;
    if (external) {
      const char* tmpl = std::getenv(kExternalSolverEnv);
      if (!tmpl || !*tmpl) throw InputError(std::string("--external needs $") + kExternalSolverEnv);
      const auto model = build_trsp(inst);
      const auto res = lp::solve_external(model.model, tmpl, dir);
      sol = extract_trsp(model, inst, res.values);
      status = lp::to_string(res.status);
    } else {
      TrspOptions opt;
      opt.time_limit_seconds = mip_time;
      const auto res = solve_trsp(inst, opt);
      sol = res.solution;
      status = lp::to_string(res.status);
    }
    write_solution(sol, dir / "solution.json");
    out << "objective " << sol.objective << " (" << status << ")\n";
    return 0;
  }
  if (*alns) {
    const auto dir = prepare(common);
    const Instance inst = load_instance(instance_path, err);
    const AlnsConfig cfg = make_alns(alnsf, common);
    const auto res = run_alns(inst, cfg);
    Solution sol = res.best;
    if (!alnsf.no_setcover) sol = setcover_finalize(res.pool, inst, sol);
    write_solution(sol, dir / "solution.json");
    out << "objective " << sol.objective << " (alns " << res.best.objective << ", " << res.stats.iterations
        << " iterations)\n";
    return 0;
  }
  if (*asg) {
    const auto dir = prepare(common);
    const Instance inst = load_instance(instance_path, err, &catf);
    lp::MipOptions mo;
    mo.time_limit_seconds = asg_time;
    std::optional<InvestmentCatalog> cat;
    AssignModel model = [&] {
      if (!with_invest) return build_assignment(inst, catf.k);
      cat = make_catalog(inst, catf, common.seed);
      return build_assignment_invest(inst, *cat, catf.k);
    }();
    const auto res = solve_assignment(model, mo);
    write_text(dir / "assignment.json", assignment_json(res, model.instance, cat ? &*cat : nullptr).dump(2) + "\n");
    out << "objective " << res.objective << " (" << lp::to_string(res.status) << ")\n";
    return 0;
  }
  if (*inv) {
    const auto dir = prepare(common);
    const Instance inst = load_instance(instance_path, err, &catf);
    const auto cat = make_catalog(inst, catf, common.seed);
    std::optional<Solution> warm;
    if (!warm_path.empty()) warm = read_solution(warm_path);
    const auto res = run_colgen(inst, cat, make_colgen(cgf, catf.k), warm ? &*warm : nullptr);
    const auto decision = extract_investments(res.master, res.problem, res.mip.values);
    auto trace = res.trace;
    if (common.deterministic) {
      for (auto& pt : trace) pt.seconds = 0.0;
    }
    ordered_json j;
    j["lp_objective"] = res.lp_objective;
    j["ip_objective"] = res.mip.objective;
    j["iterations"] = res.iterations;
    j["cg_optimal"] = res.cg_optimal;
    j["columns"] = res.columns.size();
    j["investments"] = decision_json(decision, cat);
    write_text(dir / "decision.json", j.dump(2) + "\n");
    write_text(dir / "lp_trace.csv", lp_trace_csv(trace));
    out << "lp " << res.lp_objective << " ip " << res.mip.objective << " after " << res.iterations
        << " iterations, capex " << capex(decision, cat) << '\n';
    return 0;
  }
  if (*pipe) {
    const auto dir = prepare(common);
    PipelineConfig cfg;
    cfg.alns = make_alns(alnsf, common);
    cfg.colgen = make_colgen(cgf, catf.k);
    cfg.setcover = !alnsf.no_setcover;
    cfg.warmstart = !no_warm;
    cfg.record_seconds = !common.deterministic;
    std::vector<Instance> instances;
    for (const auto& p : pipe_paths) {
      instances.push_back(load_instance(p, err, &catf));
      if (instances.back().name.empty()) instances.back().name = stem_of(p);
    }
    // Each instance gets its own seed stream, so results do not depend on --jobs.
    std::vector<PipelineResult> results(instances.size());
    std::size_t next = 0;
    while (next < instances.size()) {
      std::vector<std::future<PipelineResult>> batch;
      for (int w = 0; w < jobs && next < instances.size(); ++w, ++next) {
        batch.push_back(std::async(std::launch::async, [&, k = next] {
          PipelineConfig c = cfg;
          c.seed = common.seed * 1000003ULL + k;
          return run_pipeline(instances[k], make_catalog(instances[k], catf, common.seed), c);
        }));
      }
      const std::size_t first = next - batch.size();
      for (std::size_t b = 0; b < batch.size(); ++b) results[first + b] = batch[b].get();
    }
    Report report;
    std::vector<std::pair<std::string, double>> bc, travel, unserved;
    for (const auto& r : results) {
      report.rows.push_back(r.row);
      bc.push_back({r.row.instance_id, static_cast<double>(r.row.business_case)});
      travel.push_back({r.row.instance_id, static_cast<double>(r.row.travel_inv - r.row.travel_noinv)});
      unserved.push_back({r.row.instance_id, static_cast<double>(r.row.unserved_noinv - r.row.unserved_inv)});
    }
    write_report(report, dir / "report.csv");
    write_duration_curve(bc, "business_case", dir / "curve_business_case.csv");
    write_duration_curve(travel, "travel_diff", dir / "curve_travel_diff.csv");
    write_duration_curve(unserved, "unserved_diff", dir / "curve_unserved_diff.csv");
    int positive = 0;
    for (const auto& row : report.rows) positive += row.business_case > 0;
    out << report.rows.size() << " instances, positive business case in " << positive << '\n';
    return 0;
  }
  if (*mps) {
    const auto dir = prepare(common);
    const Instance inst = load_instance(instance_path, err, &catf);
    const fs::path target = dir / (which + ".mps");
    if (which == "trsp") {
      lp::export_mps(build_trsp(inst).model, target);
    } else if (which == "assign") {
      lp::export_mps(build_assignment(inst, catf.k).model, target);
    } else {
      lp::export_mps(build_assignment_invest(inst, make_catalog(inst, catf, common.seed), catf.k).model, target);
    }
    out << target.string() << '\n';
    return 0;
  }
  return 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace trsp
