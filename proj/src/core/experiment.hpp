#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "core/evaluate.hpp"
#include "core/plan.hpp"

namespace defplan {

// One project row of an experiment: three consecutive release versions,
// oldest first. align/train order follows the listed order.
struct ProjectTriple {
  std::string name;
  std::array<std::string, 3> versions;

  bool operator==(const ProjectTriple&) const = default;
};

// Fully-resolved experiment settings. `defaulted` lists every key the
// config file did not set, so the run log can echo where defaults
// applied.
struct ExperimentConfig {
  std::filesystem::path data_root = "data";
  std::filesystem::path output_dir = "out";
  std::vector<ProjectTriple> projects;
  std::vector<PlannerId> planners = {PlannerId::classical, PlannerId::time,
                                     PlannerId::random};
  KTestConfig ktest;
  std::vector<std::string> defaulted;
};

// Parses the flat key=value config text ('#' starts a comment; `project`
// lines repeat, everything else may appear once). Unknown keys and
// out-of-range values are config errors that name the offender.
ExperimentConfig parse_config_text(const std::string& text);

// parse_config_text over a file, with the path attached to any error.
ExperimentConfig validate_config(const std::filesystem::path& path);

// CLI-style narrowing: keep one project / one planner by name (config
// error when the name is not part of the run).
void filter_project(ExperimentConfig& config, const std::string& name);
void filter_planner(ExperimentConfig& config, const std::string& name);

// Runs every project x planner cell, writing per-project reports plus
// summary.csv and run.log under output_dir. Returns the process exit
// status: 0, or 1 when any project failed (failures are logged and the
// remaining projects still run). Missing data files abort before any
// computation with an error naming every absent file.
int run_experiment(const ExperimentConfig& config);

}  // namespace defplan
