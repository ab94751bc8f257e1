#include "trsp/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace trsp {

using json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write '" + path.string() + "'");
  os << text;
  if (!os) throw InputError("failed writing '" + path.string() + "'");
}

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw InputError("schema error at " + path + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing field");
  return *it;
}

Minutes as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) schema_error(path, "expected integer");
  return v.get<Minutes>();
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected number");
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& path) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  schema_error(path, "expected string id");
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) schema_error(path, "expected boolean");
  return v.get<bool>();
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected array");
  return v;
}

SkillSet skill_list(const json& v, const std::string& path, const Instance& inst) {
  SkillSet out;
  const auto& arr = as_array(v, path);
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string name = as_string(arr[k], path + "[" + std::to_string(k) + "]");
    auto it = std::find(inst.skills.begin(), inst.skills.end(), name);
    if (it == inst.skills.end()) schema_error(path, "unknown skill '" + name + "'");
    out.push_back(static_cast<SkillId>(it - inst.skills.begin()));
  }
  return normalized(out);
}

json skill_names(const SkillSet& s, const Instance& inst) {
  json arr = json::array();
  for (SkillId id : s) arr.push_back(inst.skills[id]);
  return arr;
}

void fill_euclidean(Instance& inst) {
  const int n = static_cast<int>(inst.tasks.size() + inst.masters.size());
  std::vector<std::pair<double, double>> xy;
  for (const auto& t : inst.tasks) xy.push_back({t.x, t.y});
  for (const auto& m : inst.masters) xy.push_back({m.x, m.y});
  inst.travel = TravelMatrix(n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      inst.travel.set(a, b, a == b ? 0 : euclidean_minutes(xy[a].first, xy[a].second, xy[b].first, xy[b].second));
    }
  }
}

void assign_canonical_locations(Instance& inst) {
  const int n_tasks = static_cast<int>(inst.tasks.size());
  for (int i = 0; i < n_tasks; ++i) inst.tasks[i].location = i;
  for (std::size_t m = 0; m < inst.masters.size(); ++m) {
    inst.masters[m].location = n_tasks + static_cast<int>(m);
  }
}

}  // namespace

Minutes euclidean_minutes(double x1, double y1, double x2, double y2) {
  const double dx = x1 - x2, dy = y1 - y2;
  const double d2 = dx * dx + dy * dy;
  auto r = static_cast<Minutes>(std::ceil(std::sqrt(d2)));
  while (r > 0 && static_cast<double>(r - 1) * static_cast<double>(r - 1) >= d2) --r;
  while (static_cast<double>(r) * static_cast<double>(r) < d2) ++r;
  return r;
}

// ---------------------------------------------------------------------------
// Canonical format

Instance parse_canonical_text(const std::string& text, std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed instance document: ") + e.what());
  }
  Instance inst;
  const auto& meta = field(doc, "meta", "instance");
  inst.horizon_days = static_cast<int>(as_int(field(meta, "horizon_days", "instance.meta"), "instance.meta.horizon_days"));
  if (meta.contains("travel_cap")) inst.travel_cap = as_int(meta["travel_cap"], "instance.meta.travel_cap");
  if (meta.contains("name")) inst.name = as_string(meta["name"], "instance.meta.name");

  const auto& skills = as_array(field(doc, "skills", "instance"), "instance.skills");
  for (std::size_t k = 0; k < skills.size(); ++k) {
    inst.skills.push_back(as_string(skills[k], "instance.skills[" + std::to_string(k) + "]"));
  }
  if (std::set<std::string>(inst.skills.begin(), inst.skills.end()).size() != inst.skills.size()) {
    schema_error("instance.skills", "duplicate skill names");
  }

  const auto& tasks = as_array(field(doc, "tasks", "instance"), "instance.tasks");
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const std::string p = "instance.tasks[" + std::to_string(k) + "]";
    const auto& j = tasks[k];
    Task t;
    t.id = as_string(field(j, "id", p), p + ".id");
    t.required_skills = skill_list(field(j, "skills", p), p + ".skills", inst);
    t.duration = as_int(field(j, "duration", p), p + ".duration");
    const auto& w = as_array(field(j, "window", p), p + ".window");
    if (w.size() != 2) schema_error(p + ".window", "expected [start, end]");
    t.window = {as_int(w[0], p + ".window[0]"), as_int(w[1], p + ".window[1]")};
    t.penalty = as_int(field(j, "penalty", p), p + ".penalty");
    if (j.contains("digitizable")) t.digitizable = as_bool(j["digitizable"], p + ".digitizable");
    if (j.contains("digitized")) t.digitized = as_bool(j["digitized"], p + ".digitized");
    t.x = as_double(field(j, "x", p), p + ".x");
    t.y = as_double(field(j, "y", p), p + ".y");
    inst.tasks.push_back(std::move(t));
  }

  const auto& masters = as_array(field(doc, "masters", "instance"), "instance.masters");
  for (std::size_t k = 0; k < masters.size(); ++k) {
    const std::string p = "instance.masters[" + std::to_string(k) + "]";
    const auto& j = masters[k];
    MasterTechnician m;
    m.id = as_string(field(j, "id", p), p + ".id");
    m.x = as_double(field(j, "x", p), p + ".x");
    m.y = as_double(field(j, "y", p), p + ".y");
    m.skills = skill_list(field(j, "skills", p), p + ".skills", inst);
    const auto& shifts = as_array(field(j, "shifts", p), p + ".shifts");
    for (std::size_t s = 0; s < shifts.size(); ++s) {
      const std::string sp = p + ".shifts[" + std::to_string(s) + "]";
      Shift sh;
      sh.day = static_cast<int>(as_int(field(shifts[s], "day", sp), sp + ".day"));
      sh.window = {as_int(field(shifts[s], "start", sp), sp + ".start"),
                   as_int(field(shifts[s], "end", sp), sp + ".end")};
      m.shifts.push_back(sh);
    }
    if (j.contains("is_new_candidate")) m.is_new_candidate = as_bool(j["is_new_candidate"], p + ".is_new_candidate");
    inst.masters.push_back(std::move(m));
  }
  assign_canonical_locations(inst);

  if (doc.contains("overtime")) {
    const auto& ot = doc["overtime"];
    if (!ot.is_object()) schema_error("instance.overtime", "expected object");
    for (const auto& [key, value] : ot.items()) {
      inst.overtime[key] = as_int(value, "instance.overtime." + key);
    }
  }

  const int n = static_cast<int>(inst.tasks.size() + inst.masters.size());
  if (doc.contains("travel")) {
    const auto& rows = as_array(field(doc["travel"], "matrix", "instance.travel"), "instance.travel.matrix");
    if (static_cast<int>(rows.size()) != n) {
      schema_error("instance.travel.matrix", "expected " + std::to_string(n) + " rows (tasks then masters)");
    }
    inst.travel = TravelMatrix(n);
    for (int a = 0; a < n; ++a) {
      const std::string rp = "instance.travel.matrix[" + std::to_string(a) + "]";
      const auto& row = as_array(rows[a], rp);
      if (static_cast<int>(row.size()) != n) schema_error(rp, "expected " + std::to_string(n) + " entries");
      for (int b = 0; b < n; ++b) inst.travel.set(a, b, as_int(row[b], rp + "[" + std::to_string(b) + "]"));
    }
    inst.explicit_travel = true;
  } else {
    fill_euclidean(inst);
  }

  validate_instance(inst);
  inst.rebuild_dailies();
  for (const auto& [id, extra] : inst.overtime) {
    if (extra < 0) throw InputError("invalid instance: negative overtime for '" + id + "'");
    inst.daily_index(id);
  }
  if (warnings) {
    for (auto& w : inst.travel.triangle_violations()) warnings->push_back("triangle inequality: " + w);
  }
  return inst;
}

Instance parse_canonical(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  return parse_canonical_text(read_file(path), warnings);
}

std::string canonical_text(const Instance& inst) {
  json doc;
  doc["meta"] = {{"name", inst.name}, {"horizon_days", inst.horizon_days}, {"travel_cap", inst.travel_cap}};
  doc["skills"] = inst.skills;
  json tasks = json::array();
  for (const auto& t : inst.tasks) {
    tasks.push_back({{"id", t.id},
                     {"skills", skill_names(t.required_skills, inst)},
                     {"duration", t.duration},
                     {"window", {t.window.start, t.window.end}},
                     {"penalty", t.penalty},
                     {"digitizable", t.digitizable},
                     {"digitized", t.digitized},
                     {"x", t.x},
                     {"y", t.y}});
  }
  doc["tasks"] = std::move(tasks);
  json masters = json::array();
  for (const auto& m : inst.masters) {
    json shifts = json::array();
    for (const auto& s : m.shifts) {
      shifts.push_back({{"day", s.day}, {"start", s.window.start}, {"end", s.window.end}});
    }
    masters.push_back({{"id", m.id},
                       {"x", m.x},
                       {"y", m.y},
                       {"skills", skill_names(m.skills, inst)},
                       {"shifts", std::move(shifts)},
                       {"is_new_candidate", m.is_new_candidate}});
  }
  doc["masters"] = std::move(masters);
  if (!inst.overtime.empty()) {
    json ot = json::object();
    for (const auto& [id, extra] : inst.overtime) ot[id] = extra;
    doc["overtime"] = std::move(ot);
  }
  if (inst.explicit_travel) {
    std::vector<int> locs;
    for (const auto& t : inst.tasks) locs.push_back(t.location);
    for (const auto& m : inst.masters) locs.push_back(m.location);
    json rows = json::array();
    for (int a : locs) {
      json row = json::array();
      for (int b : locs) row.push_back(inst.travel(a, b));
      rows.push_back(std::move(row));
    }
    doc["travel"] = {{"matrix", std::move(rows)}};
  }
  return doc.dump(1) + "\n";
}

void write_canonical(const Instance& inst, const std::filesystem::path& path) {
  write_file(path, canonical_text(inst));
}

// ---------------------------------------------------------------------------
// Literature benchmark adapter

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace

Instance import_mathlouthi_text(const std::string& text) {
  struct RawTask {
    std::string id;
    std::string node;
    Minutes duration = 0;
    Minutes penalty = 0;
    std::vector<std::string> skills;
    std::vector<TimeWindow> windows;
  };
  struct RawTech {
    std::string id;
    std::string node;
    std::vector<std::string> skills;
  };
  Instance inst;
  std::map<std::string, std::pair<double, double>> nodes;
  std::map<std::pair<std::string, std::string>, Minutes> times;
  std::vector<RawTask> raw_tasks;
  std::vector<RawTech> raw_techs;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  auto err = [&](const std::string& what) {
    throw InputError("benchmark file line " + std::to_string(line_no) + ": " + what);
  };
  auto skill_field = [&](const std::string& f) {
    std::vector<std::string> out;
    if (f != "-") out = split(f, ',');
    return out;
  };
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string rec;
    if (!(ls >> rec) || rec[0] == '#') continue;
    if (rec == "NAME") {
      ls >> inst.name;
    } else if (rec == "SKILLS") {
      std::string s;
      while (ls >> s) inst.skills.push_back(s);
    } else if (rec == "NODE") {
      std::string id;
      double x = 0, y = 0;
      if (!(ls >> id >> x >> y)) err("expected NODE <id> <x> <y>");
      nodes[id] = {x, y};
    } else if (rec == "TECH") {
      RawTech t;
      std::string skills;
      if (!(ls >> t.id >> t.node >> skills)) err("expected TECH <id> <node> <skills>");
      t.skills = skill_field(skills);
      raw_techs.push_back(std::move(t));
    } else if (rec == "TASK") {
      RawTask t;
      std::string skills, windows;
      if (!(ls >> t.id >> t.node >> t.duration >> t.penalty >> skills >> windows)) {
        err("expected TASK <id> <node> <duration> <penalty> <skills> <windows>");
      }
      t.skills = skill_field(skills);
      for (const auto& w : split(windows, ';')) {
        const auto dash = w.find('-');
        if (dash == std::string::npos) err("window '" + w + "' is not <start>-<end>");
        t.windows.push_back({std::stoll(w.substr(0, dash)), std::stoll(w.substr(dash + 1))});
      }
      if (t.windows.empty()) err("task '" + t.id + "' has no time window");
      raw_tasks.push_back(std::move(t));
    } else if (rec == "TIME") {
      std::string a, b;
      Minutes v = 0;
      if (!(ls >> a >> b >> v)) err("expected TIME <node> <node> <minutes>");
      times[{a, b}] = v;
    } else if (rec == "DIST" || rec == "TOOL" || rec == "TOOLDEPOT" || rec == "TOOLREQ") {
      continue;  // tools, tool depots and distances are not modelled
    } else {
      err("unknown record type '" + rec + "'");
    }
  }
  inst.horizon_days = 1;
  auto skill_ids = [&](const std::vector<std::string>& names) {
    SkillSet s;
    for (const auto& n : names) s.push_back(inst.skill_index(n));
    return normalized(s);
  };
  std::vector<std::string> loc_node;
  for (const auto& rt : raw_tasks) {
    for (std::size_t w = 0; w < rt.windows.size(); ++w) {
      Task t;
      t.id = rt.windows.size() == 1 ? rt.id : rt.id + "_w" + std::to_string(w + 1);
      t.required_skills = skill_ids(rt.skills);
      t.duration = rt.duration;
      t.window = rt.windows[w];
      t.penalty = rt.penalty;
      if (auto it = nodes.find(rt.node); it != nodes.end()) std::tie(t.x, t.y) = it->second;
      inst.tasks.push_back(std::move(t));
      loc_node.push_back(rt.node);
    }
  }
  for (const auto& rt : raw_techs) {
    MasterTechnician m;
    m.id = rt.id;
    m.skills = skill_ids(rt.skills);
    m.shifts = {{0, {540, 1020}}};
    if (auto it = nodes.find(rt.node); it != nodes.end()) std::tie(m.x, m.y) = it->second;
    inst.masters.push_back(std::move(m));
    loc_node.push_back(rt.node);
  }
  assign_canonical_locations(inst);
  const int n = static_cast<int>(loc_node.size());
  if (times.empty()) {
    for (const auto& node : loc_node) {
      if (!nodes.count(node)) throw InputError("benchmark file: no TIME records and no coordinates for node '" + node + "'");
    }
    fill_euclidean(inst);
  } else {
    inst.travel = TravelMatrix(n);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (loc_node[a] == loc_node[b]) continue;
        auto it = times.find({loc_node[a], loc_node[b]});
        if (it == times.end()) it = times.find({loc_node[b], loc_node[a]});
        if (it == times.end()) {
          throw InputError("benchmark file: missing TIME between nodes '" + loc_node[a] + "' and '" + loc_node[b] + "'");
        }
        inst.travel.set(a, b, it->second);
      }
    }
    inst.explicit_travel = true;
  }
  validate_instance(inst);
  inst.rebuild_dailies();
  return inst;
}

Instance import_mathlouthi(const std::filesystem::path& path) {
  return import_mathlouthi_text(read_file(path));
}

// ---------------------------------------------------------------------------
// Synthetic generator

SyntheticInstance generate_synthetic(std::uint64_t seed, const SyntheticParams& p) {
  if (p.n_tasks < 0 || p.n_masters < 0 || p.n_days <= 0 || p.area <= 0) {
    throw InputError("synthetic parameters must be positive");
  }
  if (p.n_skills <= 0 && p.n_tasks > 0) throw InputError("tasks require at least one skill (n_skills = 0)");
  if (p.min_duration <= 0 || p.min_duration > p.max_duration) throw InputError("invalid duration range");
  if (p.min_penalty < 0 || p.min_penalty > p.max_penalty) throw InputError("invalid penalty range");
  if (p.shift_start < 0 || p.shift_end - p.shift_start < p.max_duration || p.shift_end > kMinutesPerDay) {
    throw InputError("shift must fit in a day and hold the longest task");
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&](Minutes lo, Minutes hi) { return std::uniform_int_distribution<Minutes>(lo, hi)(rng); };

  SyntheticInstance out;
  Instance& inst = out.instance;
  inst.name = "syn" + std::to_string(seed);
  inst.horizon_days = p.n_days;
  inst.travel_cap = p.travel_cap;
  for (int s = 0; s < p.n_skills; ++s) inst.skills.push_back("s" + std::to_string(s));

  std::vector<std::pair<Minutes, Minutes>> centers;
  if (p.geometry == Geometry::clustered) {
    const Minutes margin = std::min<Minutes>(p.cluster_spread, p.area / 2);
    for (int c = 0; c < std::max(1, p.n_clusters); ++c) {
      centers.push_back({uniform(margin, p.area - margin), uniform(margin, p.area - margin)});
    }
  }

  std::bernoulli_distribution has_skill(p.skill_probability);
  for (int m = 0; m < p.n_masters; ++m) {
    MasterTechnician tech;
    tech.id = "m" + std::to_string(m);
    if (centers.empty()) {
      tech.x = static_cast<double>(uniform(0, p.area));
      tech.y = static_cast<double>(uniform(0, p.area));
    } else {
      const auto& c = centers[static_cast<std::size_t>(uniform(0, static_cast<Minutes>(centers.size()) - 1))];
      tech.x = static_cast<double>(c.first);
      tech.y = static_cast<double>(c.second);
    }
    for (int s = 0; s < p.n_skills; ++s) {
      if (has_skill(rng)) tech.skills.push_back(s);
    }
    if (tech.skills.empty() && p.n_skills > 0) tech.skills.push_back(static_cast<SkillId>(uniform(0, p.n_skills - 1)));
    for (int d = 0; d < p.n_days; ++d) {
      tech.shifts.push_back({d, {d * kMinutesPerDay + p.shift_start, d * kMinutesPerDay + p.shift_end}});
    }
    inst.masters.push_back(std::move(tech));
  }
  std::vector<SkillId> held;
  for (int s = 0; s < p.n_skills; ++s) {
    for (const auto& m : inst.masters) {
      if (std::binary_search(m.skills.begin(), m.skills.end(), s)) {
        held.push_back(s);
        break;
      }
    }
  }

  for (int i = 0; i < p.n_tasks; ++i) {
    Task t;
    t.id = "t" + std::to_string(i);
    int cluster = -1;
    if (centers.empty()) {
      t.x = static_cast<double>(uniform(0, p.area));
      t.y = static_cast<double>(uniform(0, p.area));
    } else {
      cluster = static_cast<int>(uniform(0, static_cast<Minutes>(centers.size()) - 1));
      const auto& c = centers[cluster];
      t.x = static_cast<double>(std::clamp<Minutes>(c.first + uniform(-p.cluster_spread, p.cluster_spread), 0, p.area));
      t.y = static_cast<double>(std::clamp<Minutes>(c.second + uniform(-p.cluster_spread, p.cluster_spread), 0, p.area));
    }
    SkillId skill = static_cast<SkillId>(uniform(0, p.n_skills - 1));
    if (p.ensure_capable && !held.empty() && !std::binary_search(held.begin(), held.end(), skill)) {
      skill = held[static_cast<std::size_t>(uniform(0, static_cast<Minutes>(held.size()) - 1))];
    }
    t.required_skills = {skill};
    t.duration = uniform(p.min_duration, p.max_duration);
    const Minutes day = uniform(0, p.n_days - 1) * kMinutesPerDay;
    if (p.window_style == WindowStyle::wide) {
      t.window = {day + p.shift_start, day + p.shift_end};
    } else {
      const Minutes start = uniform(p.shift_start, p.shift_end - t.duration);
      t.window = {day + start, day + std::min(start + t.duration + uniform(30, 120), p.shift_end + 60)};
    }
    t.penalty = uniform(p.min_penalty, p.max_penalty);
    inst.tasks.push_back(std::move(t));
    out.task_cluster.push_back(cluster);
  }
  assign_canonical_locations(inst);
  fill_euclidean(inst);
  validate_instance(inst);
  inst.rebuild_dailies();
  return out;
}

Instance gen_synthetic(std::uint64_t seed, const SyntheticParams& params) {
  return generate_synthetic(seed, params).instance;
}

// ---------------------------------------------------------------------------
// Skill bundles and catalog

std::vector<std::vector<int>> skill_incidence(const Instance& inst) {
  const auto dailies = routing_dailies(inst);
  std::vector<std::vector<int>> out(inst.skills.size(), std::vector<int>(dailies.size(), 0));
  for (std::size_t k = 0; k < dailies.size(); ++k) {
    for (SkillId s : inst.dailies[dailies[k]].skills) out[s][k] = 1;
  }
  return out;
}

int skill_distance(const Instance& inst, SkillId a, SkillId b) {
  const auto inc = skill_incidence(inst);
  const auto& va = inc[a];
  const auto& vb = inc[b];
  return static_cast<int>(va.size()) - std::inner_product(va.begin(), va.end(), vb.begin(), 0);
}

std::vector<SkillSet> kmeans_skill_bundles(const Instance& inst, int k, std::uint64_t seed) {
  const int n = static_cast<int>(inst.skills.size());
  if (k <= 0 || k > n) {
    throw InputError("k-means: k=" + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
  }
  const auto inc = skill_incidence(inst);
  const std::size_t dim = inc.empty() ? 0 : inc[0].size();
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  for (int s = 0; s < n; ++s) {
    for (std::size_t d = 0; d < dim; ++d) pts[s][d] = inc[s][d];
  }
  auto dist2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double total = 0.0;
    for (std::size_t d = 0; d < dim; ++d) total += (a[d] - b[d]) * (a[d] - b[d]);
    return total;
  };

  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> centers;
  std::vector<int> chosen;
  chosen.push_back(static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng)));
  centers.push_back(pts[chosen[0]]);
  while (static_cast<int>(centers.size()) < k) {
    std::vector<double> w(n, 0.0);
    double total = 0.0;
    for (int s = 0; s < n; ++s) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, dist2(pts[s], c));
      w[s] = best;
      total += best;
    }
    int pick = -1;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (int s = 0; s < n; ++s) {
        if (w[s] <= 0.0) continue;
        pick = s;
        if ((r -= w[s]) < 0.0) break;
      }
    } else {
      for (int s = 0; s < n && pick < 0; ++s) {
        if (std::find(chosen.begin(), chosen.end(), s) == chosen.end()) pick = s;
      }
    }
    chosen.push_back(pick);
    centers.push_back(pts[pick]);
  }

  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (int s = 0; s < n; ++s) {
      int best = 0;
      double best_d = dist2(pts[s], centers[0]);
      for (int c = 1; c < k; ++c) {
        const double d = dist2(pts[s], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[s] != best) {
        assign[s] = best;
        changed = true;
      }
    }
    // Repair empty clusters with the worst-fitting point of a shared cluster.
    for (int c = 0; c < k; ++c) {
      std::vector<int> size(k, 0);
      for (int s = 0; s < n; ++s) ++size[assign[s]];
      if (size[c] > 0) continue;
      int move = -1;
      double worst = -1.0;
      for (int s = 0; s < n; ++s) {
        if (size[assign[s]] < 2) continue;
        const double d = dist2(pts[s], centers[assign[s]]);
        if (d > worst) {
          worst = d;
          move = s;
        }
      }
      assign[move] = c;
      centers[c] = pts[move];
      changed = true;
    }
    for (int c = 0; c < k; ++c) {
      std::vector<double> mean(dim, 0.0);
      int count = 0;
      for (int s = 0; s < n; ++s) {
        if (assign[s] != c) continue;
        ++count;
        for (std::size_t d = 0; d < dim; ++d) mean[d] += pts[s][d];
      }
      for (auto& v : mean) v /= count;
      centers[c] = std::move(mean);
    }
    if (!changed) break;
  }
  std::vector<SkillSet> bundles(k);
  for (int s = 0; s < n; ++s) bundles[assign[s]].push_back(s);
  std::sort(bundles.begin(), bundles.end());
  return bundles;
}

namespace {

// Orders "t2" before "t10".
bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (std::isdigit(static_cast<unsigned char>(a[i])) && std::isdigit(static_cast<unsigned char>(b[j]))) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      std::string na = a.substr(i, ie - i), nb = b.substr(j, je - j);
      na.erase(0, std::min(na.find_first_not_of('0'), na.size()));
      nb.erase(0, std::min(nb.find_first_not_of('0'), nb.size()));
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if ((a.size() - i) != (b.size() - j)) return a.size() - i < b.size() - j;
  return a < b;
}

}  // namespace

InvestmentCatalog build_catalog(const Instance& inst, const CatalogOptions& opt) {
  InvestmentCatalog cat;
  cat.overtime_minutes = cost::kOvertimeMinutes;
  cat.overtime_cost = cost::kOvertime;
  cat.charging = opt.charging;
  cat.budgets = opt.budgets;

  for (const auto& m : inst.masters) {
    if (m.is_new_candidate) continue;
    MasterTechnician c = m;
    c.id = m.id + "+new";
    c.is_new_candidate = true;
    const Minutes days = static_cast<Minutes>(c.shifts.size());
    cat.new_tech_cost.push_back(opt.charging == NewTechCharging::per_day ? cost::kNewTechPerDay * days
                                                                        : cost::kNewTechPerDay);
    cat.new_tech_candidates.push_back(std::move(c));
  }

  const int default_bundles = opt.profile == CatalogProfile::tdc ? 10 : 5;
  const int n_skills = static_cast<int>(inst.skills.size());
  const int k = std::min(opt.n_bundles > 0 ? opt.n_bundles : default_bundles, n_skills);
  if (k > 0) {
    const auto bundles = kmeans_skill_bundles(inst, k, opt.seed);
    for (std::size_t b = 0; b < bundles.size(); ++b) {
      cat.skill_bundles.push_back({"bundle" + std::to_string(b), bundles[b],
                                   cost::kSkillUpgradePerDay * inst.horizon_days});
    }
  }

  std::vector<int> order(inst.tasks.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return natural_less(inst.tasks[a].id, inst.tasks[b].id); });
  if (opt.profile == CatalogProfile::mathlouthi) {
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const auto& t = inst.tasks[order[pos]];
      if (pos % 5 == 0 || t.digitizable) cat.digitization_cost[t.id] = cost::kDigitizationMathlouthi;
    }
  } else {
    std::set<SkillId> dig_skills;
    for (const auto& name : opt.digitizable_skills) {
      auto it = std::find(inst.skills.begin(), inst.skills.end(), name);
      if (it != inst.skills.end()) dig_skills.insert(static_cast<SkillId>(it - inst.skills.begin()));
    }
    for (int i : order) {
      const auto& t = inst.tasks[i];
      const bool by_skill = std::any_of(t.required_skills.begin(), t.required_skills.end(),
                                        [&](SkillId s) { return dig_skills.count(s) > 0; });
      if (by_skill || t.digitizable) cat.digitization_cost[t.id] = cost::kDigitizationTdc;
    }
  }
  return cat;
}

Instance with_candidates(const Instance& inst, const InvestmentCatalog& cat) {
  Instance out = inst;
  for (const auto& c : cat.new_tech_candidates) {
    const bool present = std::any_of(out.masters.begin(), out.masters.end(),
                                     [&](const MasterTechnician& m) { return m.id == c.id; });
    if (!present) out.masters.push_back(c);
  }
  out.rebuild_dailies();
  return out;
}

// ---------------------------------------------------------------------------
// Result files

std::string solution_text(const Solution& sol) {
  json doc;
  doc["objective"] = sol.objective;
  json routes = json::array();
  for (const auto& r : sol.routes) {
    json visits = json::array();
    for (const auto& v : r.visits) visits.push_back({{"task", v.task}, {"start", v.start}});
    routes.push_back({{"technician", r.technician}, {"travel", r.travel_cost}, {"visits", std::move(visits)}});
  }
  doc["routes"] = std::move(routes);
  doc["unserved"] = sol.unserved;
  doc["digitized"] = sol.digitized;
  return doc.dump(1) + "\n";
}

void write_solution(const Solution& sol, const std::filesystem::path& path) {
  write_file(path, solution_text(sol));
}

Solution read_solution(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed solution file: ") + e.what());
  }
  Solution sol;
  sol.objective = as_int(field(doc, "objective", "solution"), "solution.objective");
  const auto& routes = as_array(field(doc, "routes", "solution"), "solution.routes");
  for (std::size_t k = 0; k < routes.size(); ++k) {
    const std::string p = "solution.routes[" + std::to_string(k) + "]";
    Route r;
    r.technician = as_string(field(routes[k], "technician", p), p + ".technician");
    r.travel_cost = as_int(field(routes[k], "travel", p), p + ".travel");
    const auto& visits = as_array(field(routes[k], "visits", p), p + ".visits");
    for (std::size_t v = 0; v < visits.size(); ++v) {
      const std::string vp = p + ".visits[" + std::to_string(v) + "]";
      r.visits.push_back({as_string(field(visits[v], "task", vp), vp + ".task"),
                          as_int(field(visits[v], "start", vp), vp + ".start")});
    }
    sol.routes.push_back(std::move(r));
  }
  for (const auto& id : as_array(field(doc, "unserved", "solution"), "solution.unserved")) {
    sol.unserved.push_back(as_string(id, "solution.unserved[]"));
  }
  if (doc.contains("digitized")) {
    for (const auto& id : as_array(doc["digitized"], "solution.digitized")) {
      sol.digitized.push_back(as_string(id, "solution.digitized[]"));
    }
  }
  return sol;
}

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string report_csv(const Report& report) {
  std::ostringstream os;
  os << kReportHeader << '\n';
  for (const auto& r : report.rows) {
    if (r.business_case != r.obj_noinv - r.obj_inv - r.capex_total) {
      throw InternalError("report row '" + r.instance_id + "' breaks the business-case identity");
    }
    os << csv_field(r.instance_id) << ',' << r.obj_noinv << ',' << r.obj_inv << ',' << r.capex_total << ','
       << r.capex_ot << ',' << r.capex_dig << ',' << r.capex_skill << ',' << r.capex_nt << ','
       << r.business_case << ',' << r.unserved_noinv << ',' << r.unserved_inv << ',' << r.travel_noinv
       << ',' << r.travel_inv << ',' << r.cg_iters << ',' << (r.cg_optimal ? "true" : "false") << ','
       << fixed3(r.seconds_assm) << ',' << fixed3(r.seconds_alns) << '\n';
  }
  return os.str();
}

void write_report(const Report& report, const std::filesystem::path& path) {
  write_file(path, report_csv(report));
}

std::string duration_curve_csv(std::vector<std::pair<std::string, double>> values,
                               const std::string& value_name) {
  std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::ostringstream os;
  os << "rank,instance_id," << value_name << '\n';
  for (std::size_t k = 0; k < values.size(); ++k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", values[k].second);
    os << k + 1 << ',' << csv_field(values[k].first) << ',' << buf << '\n';
  }
  return os.str();
}

void write_duration_curve(std::vector<std::pair<std::string, double>> values,
                          const std::string& value_name, const std::filesystem::path& path) {
  write_file(path, duration_curve_csv(std::move(values), value_name));
}

}  // namespace trsp
