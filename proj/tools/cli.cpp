#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "analysis.hpp"
#include "run_config.hpp"
#include "sttopo/error.hpp"
#include "sttopo/io.hpp"
#include "sttopo/parallel.hpp"

namespace sttopo::cli {

using nlohmann::json;

namespace {

struct Overrides {
  std::string config_file;
  std::string preset;
  std::string mesh;
  std::optional<int> levels;
  std::optional<int> iterations;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string design_mode;
  std::optional<double> volume_fraction;
  bool raw_volume = false;
  std::optional<double> rtol;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("-c,--config", o.config_file, "JSON run configuration");
  sub->add_option("-p,--preset", o.preset, "Named preset (ex1a..ex2e, optionally -reduced)");
  sub->add_option("--mesh", o.mesh, "Element counts as NXxNYxNT");
  sub->add_option("--levels", o.levels, "Multigrid levels (default: automatic)");
  sub->add_option("--iterations", o.iterations, "Design iterations");
  sub->add_option("-o,--output", o.output, "Output directory");
  sub->add_option("--seed", o.seed, "Seed for random fixtures");
  sub->add_option("--threads", o.threads, "Thread count (0: runtime default)");
  sub->add_option("--design-mode", o.design_mode, "time-constant or space-time");
  sub->add_option("--volume-fraction", o.volume_fraction, "Target volume fraction");
  sub->add_flag("--raw-volume", o.raw_volume,
                "Constrain the volume of the raw design instead of the projected field");
  sub->add_option("--rtol", o.rtol, "Outer solver relative tolerance");
}

std::array<int, 3> parse_mesh(const std::string& text, std::vector<std::string>& issues) {
  std::array<int, 3> dims{};
  char x1 = 0, x2 = 0;
  std::istringstream is(text);
  if (!(is >> dims[0] >> x1 >> dims[1] >> x2 >> dims[2]) || x1 != 'x' || x2 != 'x' ||
      !is.eof()) {
    issues.push_back("--mesh: expected NXxNYxNT, got '" + text + "'");
  }
  return dims;
}

RunConfig build_config(const Overrides& o, RunConfig base, std::vector<std::string>& issues) {
  RunConfig c = std::move(base);
  if (!o.preset.empty()) {
    try {
      c = preset(o.preset);
    } catch (const ConfigError& e) {
      issues.push_back(std::string("--preset: ") + e.what());
    }
  }
  if (!o.config_file.empty()) {
    std::ifstream in(o.config_file);
    if (!in) throw IoError("cannot read config file '" + o.config_file + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file '" + o.config_file + "' is not valid JSON: " + e.what());
    }
    c = apply_json(doc, std::move(c), issues);
  }
  if (!o.mesh.empty()) {
    c.mesh = parse_mesh(o.mesh, issues);
    c.hierarchy.num_levels.reset();
  }
  if (o.levels) c.hierarchy.num_levels = *o.levels;
  if (o.iterations) c.opt.max_iterations = *o.iterations;
  if (!o.output.empty()) c.output = o.output;
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (!o.design_mode.empty()) {
    try {
      c.design_mode = parse_design_mode(o.design_mode);
    } catch (const ConfigError& e) {
      issues.push_back(std::string("--design-mode: ") + e.what());
    }
  }
  if (o.volume_fraction) c.opt.volume_fraction = *o.volume_fraction;
  if (o.raw_volume) c.opt.volume_on_physical = false;
  if (o.rtol) c.solver.outer_rtol = *o.rtol;
  return c;
}

json stats_json(const SolverStats& s) {
  return {{"status", to_string(s.status)},
          {"iterations", s.outer_iterations},
          {"relative_residual", s.final_relative_residual},
          {"level_iterations", s.level_iterations},
          {"wall_seconds", s.wall_seconds}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << j.dump(2) << '\n';
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::vector<double> thresholded(std::span<const double> g) {
  std::vector<double> t(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) t[i] = g[i] >= 0.5 ? 1.0 : 0.0;
  return t;
}

void export_design(const SpaceTimeMesh& mesh, const DesignState& d,
                   std::span<const double> temperature, const std::filesystem::path& path) {
  const std::vector<double> solid = thresholded(d.gamma_bar);
  export_vtk(mesh,
             {{"gamma", d.gamma_full},
              {"gamma_tilde", d.gamma_tilde},
              {"gamma_bar", d.gamma_bar},
              {"gamma_bar_threshold", solid}},
             {{"temperature", temperature}}, path);
}

int cmd_hierarchy(const RunConfig& c, std::ostream& out) {
  const SpaceTimeMesh mesh(c.mesh[0], c.mesh[1], c.mesh[2]);
  const Hierarchy h = build_hierarchy(mesh, c.materials, c.hierarchy.num_levels,
                                      c.hierarchy.lambda_crit, c.hierarchy.mode);
  char line[160];
  std::snprintf(line, sizeof line, "%-6s %-18s %-8s %s\n", "level", "mesh", "coarsen", "lambda_eff");
  out << line;
  for (const auto& l : h.levels) {
    const std::string dims =
        std::to_string(l.nx) + "x" + std::to_string(l.ny) + "x" + std::to_string(l.nt);
    std::snprintf(line, sizeof line, "%-6d %-18s %-8s %.6g\n", l.index, dims.c_str(),
                  to_string(l.kind).c_str(), l.lambda_eff);
    out << line;
  }
  return 0;
}

int cmd_forward(const RunConfig& c, std::optional<double> density, bool random, bool write,
                std::ostream& out) {
  const OptimizationSetup setup = make_setup(c);
  TopologyProblem tp(setup);
  std::vector<double> gamma = tp.initial_design();
  if (random) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& g : gamma) g = u(rng);
  } else if (density) {
    if (!(*density >= 0.0 && *density <= 1.0)) throw ConfigError("--density must lie in [0, 1]");
    std::fill(gamma.begin(), gamma.end(), *density);
  }
  const Evaluation ev = tp.evaluate(gamma, false);
  json j = {{"mesh", c.mesh},
            {"nodes", setup.mesh.num_nodes()},
            {"levels", tp.model().hierarchy().num_levels()},
            {"phi", ev.phi},
            {"chi", ev.chi},
            {"state", stats_json(ev.state)}};
  if (write) {
    ensure_dir(c.output);
    export_design(setup.mesh, tp.pipeline().state(), tp.temperature(), c.output / "forward.vtk");
    j["vtk"] = (c.output / "forward.vtk").string();
  }
  out << j.dump(2) << '\n';
  return 0;
}

int cmd_optimize(const RunConfig& c, std::ostream& out) {
  const OptimizationSetup setup = make_setup(c);
  ensure_dir(c.output);
  write_json(c.output / "config.json", to_json(c));
  MetricsWriter metrics(c.output / "metrics.csv");
  char line[200];
  std::snprintf(line, sizeof line, "%5s %14s %11s %6s %8s %10s %8s\n", "iter", "phi", "chi",
                "state", "adjoint", "change", "seconds");
  out << line << std::flush;
  const auto t0 = std::chrono::steady_clock::now();
  const OptResult r = optimize(setup, [&](const OptRecord& rec) {
    metrics.write(rec);
    std::snprintf(line, sizeof line, "%5d %14.8g %11.3e %6d %8d %10.3e %8.2f\n", rec.iteration,
                  rec.phi, rec.chi, rec.state.outer_iterations, rec.adjoint.outer_iterations,
                  rec.design_change, rec.wall_seconds);
    out << line << std::flush;
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!r.design.gamma_bar.empty()) {
    export_design(setup.mesh, r.design, r.temperature, c.output / "design.vtk");
  }
  json j = {{"iterations", r.records.size()},
            {"converged", r.converged},
            {"wall_seconds", seconds},
            {"metrics", (c.output / "metrics.csv").string()}};
  if (!r.records.empty()) {
    j["initial_phi"] = r.records.front().phi;
    j["final_phi"] = r.records.back().phi;
    j["final_chi"] = r.records.back().chi;
    double s = 0.0, a = 0.0;
    for (const auto& rec : r.records) {
      s += rec.state.outer_iterations;
      a += rec.adjoint.outer_iterations;
    }
    j["avg_state_iterations"] = s / static_cast<double>(r.records.size());
    j["avg_adjoint_iterations"] = a / static_cast<double>(r.records.size());
  }
  if (!r.design.gamma_bar.empty()) {
    j["discreteness"] = discreteness(r.design.gamma_bar);
    j["vtk"] = (c.output / "design.vtk").string();
    if (c.problem.example == ExampleId::MovingSource) {
      j["orbit_tracking"] = orbit_tracking(setup.mesh, setup.problem, r.design.gamma_bar);
    }
  }
  if (r.failure) j["failure"] = *r.failure;
  write_json(c.output / "summary.json", j);
  out << j.dump(2) << '\n';
  if (r.failure) throw SolverError(*r.failure);
  return 0;
}

int cmd_compare(const RunConfig& c, std::optional<double> density, int steps, std::ostream& out) {
  const double d = density.value_or(c.opt.volume_fraction);
  const ConsistencyReport rep = compare_ts(c, d, steps);
  const json j = {{"mesh", c.mesh},
                  {"steps", rep.steps},
                  {"density", d},
                  {"final_time_relative_l2", rep.relative_l2},
                  {"phi_space_time", rep.phi_space_time},
                  {"phi_time_stepping", rep.phi_time_stepping},
                  {"space_time", stats_json(rep.space_time)},
                  {"space_time_seconds", rep.space_time_seconds},
                  {"time_stepping_iterations", rep.time_stepping_iterations},
                  {"time_stepping_seconds", rep.time_stepping_seconds}};
  out << j.dump(2) << '\n';
  return 0;
}

int cmd_gradcheck(RunConfig c, bool mesh_given, int samples, double step, double limit,
                  std::ostream& out) {
  if (!mesh_given) {
    c.mesh = {6, 6, 8};
    c.hierarchy.num_levels.reset();
  }
  c.solver.outer_rtol = std::min(c.solver.outer_rtol, 1e-11);
  c.solver.outer_maxit = std::max(c.solver.outer_maxit, 400);
  c.filter.rtol = std::min(c.filter.rtol, 1e-13);
  validate(c);
  const GradientCheckResult r = gradient_check(make_setup(c), samples, step, c.seed);
  char line[160];
  std::snprintf(line, sizeof line, "%8s %16s %16s %12s\n", "index", "adjoint", "fd", "rel_error");
  out << line;
  for (std::size_t i = 0; i < r.indices.size(); ++i) {
    const double scale = std::max(std::abs(r.adjoint[i]), std::abs(r.finite_difference[i]));
    const double rel = scale > 0 ? std::abs(r.adjoint[i] - r.finite_difference[i]) / scale : 0.0;
    std::snprintf(line, sizeof line, "%8lld %16.9e %16.9e %12.3e\n",
                  static_cast<long long>(r.indices[i]), r.adjoint[i], r.finite_difference[i], rel);
    out << line;
  }
  std::snprintf(line, sizeof line, "max relative error: %.3e (limit %.1e)\n", r.max_relative_error, limit);
  out << line;
  return r.max_relative_error <= limit ? 0 : 1;
}

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Dimension: return 3;
    case ErrorCategory::Hierarchy: return 4;
    case ErrorCategory::Solver: return 5;
    case ErrorCategory::Io: return 6;
  }
  return 70;
}

int report(std::ostream& err, std::string_view category, const std::string& message,
           const std::vector<std::string>& issues = {}) {
  json j = {{"error", category}, {"message", message}};
  if (!issues.empty()) j["issues"] = issues;
  err << j.dump() << '\n';
  return category == "config" ? 2 : 70;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Space-time topology optimization for transient heat conduction", "sttopo"};
  app.require_subcommand(1);
  Overrides o;
  std::optional<double> density;
  bool random = false, write_vtk = false;
  int steps = 0, samples = 10;
  double step = 1e-6, limit = 1e-4;

  auto* forward = app.add_subcommand("forward", "Single state solve");
  add_common(forward, o);
  forward->add_option("--density", density, "Uniform raw design value");
  forward->add_flag("--random", random, "Random design drawn from --seed");
  forward->add_flag("--vtk", write_vtk, "Write forward.vtk to the output directory");

  auto* opt = app.add_subcommand("optimize", "Full optimization loop");
  add_common(opt, o);

  auto* hier = app.add_subcommand("hierarchy", "Print the multigrid hierarchy");
  add_common(hier, o);

  auto* cmp = app.add_subcommand("compare-ts", "Space-time solve against time stepping");
  add_common(cmp, o);
  cmp->add_option("--density", density, "Uniform physical density (default: volume fraction)");
  cmp->add_option("--steps", steps, "Time steps (default: n_t)");

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient audit");
  add_common(grad, o);
  grad->add_option("--samples", samples, "Design variables to check");
  grad->add_option("--step", step, "Central difference step");
  grad->add_option("--limit", limit, "Pass threshold on the max relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    return report(err, "config", e.what());
  }

  try {
    std::vector<std::string> issues;
    RunConfig c = build_config(o, RunConfig{}, issues);
    for (auto& issue : validation_issues(c)) issues.push_back(std::move(issue));
    if (!issues.empty()) return report(err, "config", "invalid run configuration", issues);

    configure_threads();
    if (c.threads > 0) set_thread_count(c.threads);

    if (hier->parsed()) return cmd_hierarchy(c, out);
    if (forward->parsed()) return cmd_forward(c, density, random, write_vtk, out);
    if (opt->parsed()) return cmd_optimize(c, out);
    if (cmp->parsed()) return cmd_compare(c, density, steps, out);
    if (grad->parsed()) return cmd_gradcheck(c, !o.mesh.empty() || !o.config_file.empty(), samples, step, limit, out);
  } catch (const Error& e) {
    report(err, to_string(e.category()), e.what());
    return exit_code(e.category());
  } catch (const std::exception& e) {
    return report(err, "internal", e.what());
  }
  return 70;
}

}  // namespace sttopo::cli
