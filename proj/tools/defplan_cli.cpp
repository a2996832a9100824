// Command-line front end. Links only the public C API so it exercises
// the same surface any other consumer of the shared library sees.
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "defplan/defplan.h"

namespace {

// Usage and configuration problems exit 2; a run that completed with
// project-level failures exits 1.
int fail_with(dfp_status status) {
  std::cerr << "error (" << dfp_status_name(status)
            << "): " << dfp_last_error() << "\n";
  return status == DFP_ERR_RUN_FAILED ? 1 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Release-aware defect-reduction planner"};
  app.set_version_flag("--version", []() {
    return std::string("defplan ") + dfp_version();
  });
  app.require_subcommand(1);

  std::string config_path;
  std::string project;
  std::string planner;
  std::string out_dir;
  std::uint64_t seed = 0;

  CLI::App* run =
      app.add_subcommand("run", "Run the configured experiments");
  run->add_option("--config", config_path, "Experiment config file")
      ->required();
  run->add_option("--project", project,
                  "Run only this project from the config");
  run->add_option("--planner", planner,
                  "Run only this planner (classical, time, random)");
  CLI::Option* seed_option =
      run->add_option("--seed", seed, "Master seed override");
  run->add_option("--out", out_dir, "Output directory override");

  std::string corpus_root = "data";
  CLI::App* synth = app.add_subcommand(
      "synth", "Write the bundled synthetic release corpus");
  synth->add_option("--out", corpus_root, "Corpus root directory")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    dfp_status status = dfp_write_fixture_data(corpus_root.c_str());
    if (status != DFP_OK) return fail_with(status);
    std::cout << "corpus written under " << corpus_root << "\n";
    return 0;
  }

  dfp_config* config = nullptr;
  dfp_status status = dfp_config_load(config_path.c_str(), &config);
  if (status != DFP_OK) return fail_with(status);

  if (!project.empty()) {
    status = dfp_config_select_project(config, project.c_str());
  }
  if (status == DFP_OK && !planner.empty()) {
    status = dfp_config_select_planner(config, planner.c_str());
  }
  if (status == DFP_OK && seed_option->count() > 0) {
    status = dfp_config_set_seed(config, seed);
  }
  if (status == DFP_OK && !out_dir.empty()) {
    status = dfp_config_set_output_dir(config, out_dir.c_str());
  }
  if (status == DFP_OK) {
    status = dfp_run_experiment(config);
  }

  if (status != DFP_OK) {
    int exit_code = fail_with(status);
    if (status == DFP_ERR_RUN_FAILED) {
      std::cerr << "reports under " << dfp_config_output_dir(config)
                << "\n";
    }
    dfp_config_free(config);
    return exit_code;
  }

  std::cout << "reports written under " << dfp_config_output_dir(config)
            << "\n";
  dfp_config_free(config);
  return 0;
}
