#include "run_config.hpp"

#include <set>
#include <sstream>

#include "sttopo/error.hpp"

namespace sttopo::cli {

using nlohmann::json;

namespace {

RunConfig example1(std::array<int, 3> mesh) {
  RunConfig c;
  c.mesh = mesh;
  c.problem = ProblemDefinition::oscillating();
  c.materials.tau = c.problem.tau;
  return c;
}

RunConfig example2(std::array<int, 3> mesh) {
  RunConfig c;
  c.mesh = mesh;
  c.problem = ProblemDefinition::moving();
  c.materials.tau = c.problem.tau;
  return c;
}

// Time-varying designs: r_t = 0.3 physical time units and v_f = 0.1.
void space_time_design(RunConfig& c, double r_t_physical) {
  c.design_mode = DesignMode::SpaceTime;
  c.filter.r_t = r_t_physical / c.problem.tau;
  c.opt.volume_fraction = 0.1;
}

RunConfig base_preset(const std::string& name) {
  if (name == "ex1a") return example1({100, 100, 480});
  if (name == "ex1b") {
    RunConfig c = example1({640, 640, 1280});
    c.hierarchy.num_levels = 7;
    return c;
  }
  if (name == "ex1c") {
    RunConfig c = base_preset("ex1b");
    c.materials.k_con = 10.0;
    return c;
  }
  if (name == "ex1d") {
    RunConfig c = base_preset("ex1b");
    c.materials.c_con = 100.0;
    c.materials.p_c = 4.0;
    return c;
  }
  if (name == "ex2a") {
    RunConfig c = example2({640, 640, 1280});
    c.hierarchy.num_levels = 8;
    return c;
  }
  if (name == "ex2b") {
    RunConfig c = base_preset("ex2a");
    space_time_design(c, 0.3);
    return c;
  }
  if (name == "ex2c") {
    RunConfig c = base_preset("ex2b");
    c.materials.c_con = 100.0;
    return c;
  }
  if (name == "ex2d") {
    RunConfig c = example2({1280, 1280, 2560});
    c.design_mode = DesignMode::SpaceTime;
    c.opt.volume_fraction = 0.1;
    return c;
  }
  if (name == "ex2e") {
    RunConfig c = base_preset("ex2d");
    c.filter.r_t = 0.0166 / c.problem.tau;
    return c;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

template <class T>
void read(const json& obj, const char* key, T& target, const std::string& where,
          std::vector<std::string>& issues) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    target = it->template get<T>();
  } catch (const json::exception&) {
    issues.push_back(where + key + ": wrong type (" + std::string(it->type_name()) + ")");
  }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where,
                std::vector<std::string>& issues) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items()) {
    if (!ok.count(k)) issues.push_back(where + k + ": unknown key");
  }
}

const json* section(const json& doc, const char* key, std::vector<std::string>& issues) {
  const auto it = doc.find(key);
  if (it == doc.end()) return nullptr;
  if (!it->is_object()) {
    issues.push_back(std::string(key) + ": expected an object");
    return nullptr;
  }
  return &*it;
}

void collect(std::vector<std::string>& issues, const char* where, auto&& check) {
  try {
    check();
  } catch (const Error& e) {
    issues.push_back(std::string(where) + ": " + e.what());
  }
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"ex1a", "ex1b", "ex1c", "ex1d", "ex2a", "ex2b", "ex2c", "ex2d", "ex2e"};
}

RunConfig preset(const std::string& name) {
  const std::string suffix = "-reduced";
  const bool reduced =
      name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  RunConfig c = base_preset(reduced ? name.substr(0, name.size() - suffix.size()) : name);
  if (reduced) {
    c.mesh = {64, 64, 128};
    c.hierarchy.num_levels.reset();
  }
  c.preset = name;
  return c;
}

RunConfig apply_json(const json& doc, RunConfig c, std::vector<std::string>& issues) {
  if (!doc.is_object()) {
    issues.push_back("config: expected a JSON object");
    return c;
  }
  check_keys(doc,
             {"preset", "mesh", "problem", "materials", "solver", "hierarchy", "filter",
              "design_mode", "optimizer", "threads", "output", "seed"},
             "", issues);
  if (doc.contains("preset")) {
    std::string name;
    read(doc, "preset", name, "", issues);
    try {
      c = preset(name);
    } catch (const ConfigError& e) {
      issues.push_back(std::string("preset: ") + e.what());
    }
  }
  if (doc.contains("mesh")) {
    const json& m = doc["mesh"];
    if (m.is_array() && m.size() == 3 && m[0].is_number_integer() && m[1].is_number_integer() &&
        m[2].is_number_integer()) {
      c.mesh = {m[0].get<int>(), m[1].get<int>(), m[2].get<int>()};
    } else {
      issues.push_back("mesh: expected [n_x1, n_x2, n_t]");
    }
  }
  if (const json* p = section(doc, "problem", issues)) {
    check_keys(*p,
               {"example", "q0", "radius", "sigma", "omega", "tau", "sink_half_width",
                "source_frequency"},
               "problem.", issues);
    if (p->contains("example")) {
      std::string ex;
      read(*p, "example", ex, "problem.", issues);
      if (ex == "oscillating") {
        c.problem = ProblemDefinition::oscillating();
      } else if (ex == "moving") {
        c.problem = ProblemDefinition::moving();
      } else {
        issues.push_back("problem.example: expected 'oscillating' or 'moving'");
      }
    }
    read(*p, "q0", c.problem.q0, "problem.", issues);
    read(*p, "radius", c.problem.radius, "problem.", issues);
    read(*p, "sigma", c.problem.sigma, "problem.", issues);
    read(*p, "omega", c.problem.omega, "problem.", issues);
    read(*p, "tau", c.problem.tau, "problem.", issues);
    read(*p, "sink_half_width", c.problem.sink_half_width, "problem.", issues);
    read(*p, "source_frequency", c.problem.source_frequency, "problem.", issues);
    c.materials.tau = c.problem.tau;
  }
  if (const json* m = section(doc, "materials", issues)) {
    check_keys(*m, {"c_ins", "c_con", "k_ins", "k_con", "p_c", "p_k", "length"}, "materials.",
               issues);
    read(*m, "c_ins", c.materials.c_ins, "materials.", issues);
    read(*m, "c_con", c.materials.c_con, "materials.", issues);
    read(*m, "k_ins", c.materials.k_ins, "materials.", issues);
    read(*m, "k_con", c.materials.k_con, "materials.", issues);
    read(*m, "p_c", c.materials.p_c, "materials.", issues);
    read(*m, "p_k", c.materials.p_k, "materials.", issues);
    read(*m, "length", c.materials.length, "materials.", issues);
  }
  if (const json* s = section(doc, "solver", issues)) {
    check_keys(*s,
               {"outer_rtol", "smoother_rtol", "smoother_maxit", "coarse_maxit", "outer_maxit",
                "restart"},
               "solver.", issues);
    read(*s, "outer_rtol", c.solver.outer_rtol, "solver.", issues);
    read(*s, "smoother_rtol", c.solver.smoother_rtol, "solver.", issues);
    read(*s, "smoother_maxit", c.solver.smoother_maxit, "solver.", issues);
    read(*s, "coarse_maxit", c.solver.coarse_maxit, "solver.", issues);
    read(*s, "outer_maxit", c.solver.outer_maxit, "solver.", issues);
    read(*s, "restart", c.solver.restart, "solver.", issues);
  }
  if (const json* h = section(doc, "hierarchy", issues)) {
    check_keys(*h, {"levels", "lambda_crit", "mode"}, "hierarchy.", issues);
    if (h->contains("levels")) {
      if ((*h)["levels"].is_null()) {
        c.hierarchy.num_levels.reset();
      } else {
        int n = 0;
        read(*h, "levels", n, "hierarchy.", issues);
        c.hierarchy.num_levels = n;
      }
    }
    read(*h, "lambda_crit", c.hierarchy.lambda_crit, "hierarchy.", issues);
    if (h->contains("mode")) {
      std::string mode;
      read(*h, "mode", mode, "hierarchy.", issues);
      if (mode == "semi") {
        c.hierarchy.mode = CoarseningMode::Semi;
      } else if (mode == "full") {
        c.hierarchy.mode = CoarseningMode::Full;
      } else {
        issues.push_back("hierarchy.mode: expected 'semi' or 'full'");
      }
    }
  }
  if (const json* f = section(doc, "filter", issues)) {
    check_keys(*f, {"r_x", "r_t", "beta", "eta", "rtol", "max_iterations"}, "filter.", issues);
    read(*f, "r_x", c.filter.r_x, "filter.", issues);
    read(*f, "r_t", c.filter.r_t, "filter.", issues);
    read(*f, "beta", c.filter.beta, "filter.", issues);
    read(*f, "eta", c.filter.eta, "filter.", issues);
    read(*f, "rtol", c.filter.rtol, "filter.", issues);
    read(*f, "max_iterations", c.filter.max_iterations, "filter.", issues);
  }
  if (doc.contains("design_mode")) {
    std::string mode;
    read(doc, "design_mode", mode, "", issues);
    collect(issues, "design_mode", [&] { c.design_mode = parse_design_mode(mode); });
  }
  if (const json* o = section(doc, "optimizer", issues)) {
    check_keys(*o,
               {"p_norm", "volume_fraction", "max_iterations", "change_tolerance",
                "volume_on_physical", "include_artificial_sensitivity", "initial_density", "mma"},
               "optimizer.", issues);
    read(*o, "p_norm", c.opt.p_norm, "optimizer.", issues);
    read(*o, "volume_fraction", c.opt.volume_fraction, "optimizer.", issues);
    read(*o, "max_iterations", c.opt.max_iterations, "optimizer.", issues);
    read(*o, "change_tolerance", c.opt.change_tolerance, "optimizer.", issues);
    read(*o, "volume_on_physical", c.opt.volume_on_physical, "optimizer.", issues);
    read(*o, "include_artificial_sensitivity", c.opt.include_artificial_sensitivity,
         "optimizer.", issues);
    if (o->contains("initial_density")) {
      if ((*o)["initial_density"].is_null()) {
        c.opt.initial_density.reset();
      } else {
        double d = 0.0;
        read(*o, "initial_density", d, "optimizer.", issues);
        c.opt.initial_density = d;
      }
    }
    if (const json* m = section(*o, "mma", issues)) {
      check_keys(*m,
                 {"move_limit", "asymptote_init", "asymptote_increase", "asymptote_decrease",
                  "beta_scaled_asymptotes", "raa0", "c", "d", "dual_tolerance"},
                 "optimizer.mma.", issues);
      read(*m, "move_limit", c.opt.mma.move_limit, "optimizer.mma.", issues);
      read(*m, "asymptote_init", c.opt.mma.asymptote_init, "optimizer.mma.", issues);
      read(*m, "asymptote_increase", c.opt.mma.asymptote_increase, "optimizer.mma.", issues);
      read(*m, "asymptote_decrease", c.opt.mma.asymptote_decrease, "optimizer.mma.", issues);
      read(*m, "beta_scaled_asymptotes", c.opt.mma.beta_scaled_asymptotes, "optimizer.mma.",
           issues);
      read(*m, "raa0", c.opt.mma.raa0, "optimizer.mma.", issues);
      read(*m, "c", c.opt.mma.c, "optimizer.mma.", issues);
      read(*m, "d", c.opt.mma.d, "optimizer.mma.", issues);
      read(*m, "dual_tolerance", c.opt.mma.dual_tolerance, "optimizer.mma.", issues);
    }
  }
  read(doc, "threads", c.threads, "", issues);
  if (doc.contains("output")) {
    std::string out;
    read(doc, "output", out, "", issues);
    c.output = out;
  }
  read(doc, "seed", c.seed, "", issues);
  return c;
}

std::vector<std::string> validation_issues(const RunConfig& c) {
  std::vector<std::string> issues;
  const auto [nx, ny, nt] = c.mesh;
  bool mesh_ok = true;
  if (nx < 2 || ny < 2 || nt < 2) {
    issues.push_back("mesh: every element count must be >= 2");
    mesh_ok = false;
  }
  if (nx != ny) {
    issues.push_back("mesh: n_x1 and n_x2 must match (square elements)");
    mesh_ok = false;
  }
  if (c.problem.tau != c.materials.tau) issues.push_back("materials.tau: must equal problem.tau");
  collect(issues, "problem", [&] { c.problem.validate(); });
  collect(issues, "materials", [&] { c.materials.validate(); });
  collect(issues, "solver", [&] { c.solver.validate(); });
  collect(issues, "optimizer", [&] { c.opt.validate(); });
  if (c.hierarchy.num_levels && *c.hierarchy.num_levels < 1) {
    issues.push_back("hierarchy.levels: must be >= 1");
  }
  if (!(c.hierarchy.lambda_crit > 0.0)) issues.push_back("hierarchy.lambda_crit: must be positive");
  if (c.threads < 0) issues.push_back("threads: must be >= 0");
  if (mesh_ok) {
    const SpaceTimeMesh mesh(nx, ny, nt);
    collect(issues, "filter", [&] { c.filter.resolved(mesh).validate(); });
    collect(issues, "hierarchy", [&] {
      build_hierarchy(mesh, c.materials, c.hierarchy.num_levels, c.hierarchy.lambda_crit,
                      c.hierarchy.mode);
    });
  }
  return issues;
}

void validate(const RunConfig& c) {
  const auto issues = validation_issues(c);
  if (issues.empty()) return;
  std::ostringstream os;
  os << "invalid run configuration (" << issues.size() << " issue" << (issues.size() > 1 ? "s" : "")
     << ")";
  for (const auto& i : issues) os << "\n  " << i;
  throw ConfigError(os.str());
}

OptimizationSetup make_setup(const RunConfig& c) {
  OptimizationSetup s;
  s.mesh = SpaceTimeMesh(c.mesh[0], c.mesh[1], c.mesh[2]);
  s.problem = c.problem;
  s.materials = c.materials;
  s.solver = c.solver;
  s.filter = c.filter;
  s.design_mode = c.design_mode;
  s.hierarchy = c.hierarchy;
  s.opt = c.opt;
  s.opt.mma.beta = c.filter.beta;
  return s;
}

json to_json(const RunConfig& c) {
  json j;
  if (!c.preset.empty()) j["preset"] = c.preset;
  j["mesh"] = c.mesh;
  j["problem"] = {{"example", to_string(c.problem.example)},
                  {"q0", c.problem.q0},
                  {"radius", c.problem.radius},
                  {"sigma", c.problem.sigma},
                  {"omega", c.problem.omega},
                  {"tau", c.problem.tau},
                  {"sink_half_width", c.problem.sink_half_width},
                  {"source_frequency", c.problem.source_frequency}};
  j["materials"] = {{"c_ins", c.materials.c_ins}, {"c_con", c.materials.c_con},
                    {"k_ins", c.materials.k_ins}, {"k_con", c.materials.k_con},
                    {"p_c", c.materials.p_c},     {"p_k", c.materials.p_k},
                    {"length", c.materials.length}};
  j["solver"] = {{"outer_rtol", c.solver.outer_rtol},     {"smoother_rtol", c.solver.smoother_rtol},
                 {"smoother_maxit", c.solver.smoother_maxit}, {"coarse_maxit", c.solver.coarse_maxit},
                 {"outer_maxit", c.solver.outer_maxit},   {"restart", c.solver.restart}};
  j["hierarchy"] = {{"levels", c.hierarchy.num_levels ? json(*c.hierarchy.num_levels) : json()},
                    {"lambda_crit", c.hierarchy.lambda_crit},
                    {"mode", c.hierarchy.mode == CoarseningMode::Semi ? "semi" : "full"}};
  j["filter"] = {{"r_x", c.filter.r_x},   {"r_t", c.filter.r_t},   {"beta", c.filter.beta},
                 {"eta", c.filter.eta},   {"rtol", c.filter.rtol}, {"max_iterations", c.filter.max_iterations}};
  j["design_mode"] = to_string(c.design_mode);
  j["optimizer"] = {
      {"p_norm", c.opt.p_norm},
      {"volume_fraction", c.opt.volume_fraction},
      {"max_iterations", c.opt.max_iterations},
      {"change_tolerance", c.opt.change_tolerance},
      {"volume_on_physical", c.opt.volume_on_physical},
      {"include_artificial_sensitivity", c.opt.include_artificial_sensitivity},
      {"initial_density", c.opt.initial_density ? json(*c.opt.initial_density) : json()},
      {"mma",
       {{"move_limit", c.opt.mma.move_limit},
        {"asymptote_init", c.opt.mma.asymptote_init},
        {"asymptote_increase", c.opt.mma.asymptote_increase},
        {"asymptote_decrease", c.opt.mma.asymptote_decrease},
        {"beta_scaled_asymptotes", c.opt.mma.beta_scaled_asymptotes},
        {"raa0", c.opt.mma.raa0},
        {"c", c.opt.mma.c},
        {"d", c.opt.mma.d},
        {"dual_tolerance", c.opt.mma.dual_tolerance}}}};
  j["threads"] = c.threads;
  j["output"] = c.output.string();
  j["seed"] = c.seed;
  return j;
}

}  // namespace sttopo::cli
