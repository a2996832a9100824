#include "defplan/defplan.h"

#include <exception>
#include <string>

#include "core/experiment.hpp"
#include "core/synthdata.hpp"

struct dfp_config {
  defplan::ExperimentConfig value;
  mutable std::string output_dir_text;  // backs dfp_config_output_dir
};

namespace {

thread_local std::string g_last_error;

dfp_status map_code(defplan::ErrorCode code) {
  using defplan::ErrorCode;
  switch (code) {
    case ErrorCode::io: return DFP_ERR_IO;
    case ErrorCode::schema: return DFP_ERR_SCHEMA;
    case ErrorCode::parse: return DFP_ERR_PARSE;
    case ErrorCode::config: return DFP_ERR_CONFIG;
    case ErrorCode::alignment: return DFP_ERR_ALIGNMENT;
    case ErrorCode::rebalance: return DFP_ERR_REBALANCE;
    case ErrorCode::training: return DFP_ERR_TRAINING;
    case ErrorCode::undefined_effect: return DFP_ERR_UNDEFINED_EFFECT;
    case ErrorCode::contract: return DFP_ERR_CONTRACT;
  }
  return DFP_ERR_UNKNOWN;
}

// Runs the body, translating exceptions into status codes and
// stashing their message for dfp_last_error().
template <typename Body>
dfp_status guarded(Body&& body) {
  try {
    dfp_status status = body();
    if (status == DFP_OK) g_last_error.clear();
    return status;
  } catch (const defplan::Error& error) {
    g_last_error = error.what();
    return map_code(error.code());
  } catch (const std::exception& error) {
    g_last_error = error.what();
    return DFP_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown error";
    return DFP_ERR_UNKNOWN;
  }
}

dfp_status contract_violation(const char* message) {
  g_last_error = message;
  return DFP_ERR_CONTRACT;
}

}  // namespace

extern "C" {

const char* dfp_version(void) { return "1.0.0"; }

const char* dfp_status_name(dfp_status status) {
  switch (status) {
    case DFP_OK: return "ok";
    case DFP_ERR_IO: return "io";
    case DFP_ERR_SCHEMA: return "schema";
    case DFP_ERR_PARSE: return "parse";
    case DFP_ERR_CONFIG: return "config";
    case DFP_ERR_ALIGNMENT: return "alignment";
    case DFP_ERR_REBALANCE: return "rebalance";
    case DFP_ERR_TRAINING: return "training";
    case DFP_ERR_UNDEFINED_EFFECT: return "undefined_effect";
    case DFP_ERR_CONTRACT: return "contract";
    case DFP_ERR_RUN_FAILED: return "run_failed";
    case DFP_ERR_UNKNOWN: return "unknown";
  }
  return "unknown";
}

const char* dfp_last_error(void) { return g_last_error.c_str(); }

dfp_status dfp_config_load(const char* path, dfp_config** out) {
  if (out == nullptr) return contract_violation("null out pointer");
  *out = nullptr;
  if (path == nullptr) return contract_violation("null path");
  return guarded([&] {
    *out = new dfp_config{defplan::validate_config(path), {}};
    return DFP_OK;
  });
}

void dfp_config_free(dfp_config* config) { delete config; }

dfp_status dfp_config_select_project(dfp_config* config, const char* name) {
  if (config == nullptr) return contract_violation("null config");
  if (name == nullptr) return contract_violation("null name");
  return guarded([&] {
    defplan::filter_project(config->value, name);
    return DFP_OK;
  });
}

dfp_status dfp_config_select_planner(dfp_config* config, const char* name) {
  if (config == nullptr) return contract_violation("null config");
  if (name == nullptr) return contract_violation("null name");
  return guarded([&] {
    defplan::filter_planner(config->value, name);
    return DFP_OK;
  });
}

const char* dfp_config_output_dir(const dfp_config* config) {
  if (config == nullptr) return nullptr;
  config->output_dir_text = config->value.output_dir.string();
  return config->output_dir_text.c_str();
}

dfp_status dfp_config_set_seed(dfp_config* config, uint64_t seed) {
  if (config == nullptr) return contract_violation("null config");
  config->value.ktest.master_seed = seed;
  g_last_error.clear();
  return DFP_OK;
}

dfp_status dfp_config_set_data_root(dfp_config* config, const char* dir) {
  if (config == nullptr) return contract_violation("null config");
  if (dir == nullptr) return contract_violation("null dir");
  config->value.data_root = dir;
  g_last_error.clear();
  return DFP_OK;
}

dfp_status dfp_config_set_output_dir(dfp_config* config, const char* dir) {
  if (config == nullptr) return contract_violation("null config");
  if (dir == nullptr) return contract_violation("null dir");
  config->value.output_dir = dir;
  g_last_error.clear();
  return DFP_OK;
}

dfp_status dfp_run_experiment(const dfp_config* config) {
  if (config == nullptr) return contract_violation("null config");
  return guarded([&] {
    if (defplan::run_experiment(config->value) != 0) {
      g_last_error = "one or more projects failed; see run.log";
      return DFP_ERR_RUN_FAILED;
    }
    return DFP_OK;
  });
}

dfp_status dfp_write_fixture_data(const char* root) {
  if (root == nullptr) return contract_violation("null root");
  return guarded([&] {
    defplan::write_fixture_data(root);
    return DFP_OK;
  });
}

}  // extern "C"
