#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sttopo/optimizer.hpp"

namespace sttopo::cli {

struct RunConfig {
  std::string preset;
  std::array<int, 3> mesh{32, 32, 64};
  ProblemDefinition problem;
  MaterialSet materials;
  SolverConfig solver;
  HierarchyOptions hierarchy;
  FilterConfig filter;
  DesignMode design_mode = DesignMode::TimeConstant;
  OptConfig opt;
  int threads = 0;  // 0 keeps the runtime default
  std::filesystem::path output = "sttopo-out";
  std::uint64_t seed = 1;
};

std::vector<std::string> preset_names();
// Throws ConfigError for an unknown name. "<name>-reduced" gives the
// 64x64x128 desk-scale variant with automatic level count.
RunConfig preset(const std::string& name);

// Applies a JSON document on top of `base` (or on top of its "preset" key).
// Type errors and unknown keys are appended to `issues`.
RunConfig apply_json(const nlohmann::json& doc, RunConfig base, std::vector<std::string>& issues);

// Every violated constraint, one entry per field or cross-field rule.
std::vector<std::string> validation_issues(const RunConfig& config);

// Throws ConfigError listing all issues.
void validate(const RunConfig& config);

OptimizationSetup make_setup(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);

}  // namespace sttopo::cli
