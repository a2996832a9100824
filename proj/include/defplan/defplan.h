/* defplan — C API for the release-aware defect-reduction planner.
 *
 * All functions returning dfp_status report failures through the return
 * value; dfp_last_error() holds a human-readable message for the most
 * recent failing call on the calling thread. Pointers returned by the
 * library stay valid until the next library call on the same thread.
 */
#pragma once

#include <stdint.h>

#if defined(_WIN32)
#define DFP_API __declspec(dllexport)
#else
#define DFP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dfp_status {
  DFP_OK = 0,
  DFP_ERR_IO = 1,               /* file missing / unreadable / unwritable */
  DFP_ERR_SCHEMA = 2,           /* header or column-set problems */
  DFP_ERR_PARSE = 3,            /* malformed cell values */
  DFP_ERR_CONFIG = 4,           /* bad experiment configuration */
  DFP_ERR_ALIGNMENT = 5,        /* releases share no units */
  DFP_ERR_REBALANCE = 6,        /* oversampling impossible */
  DFP_ERR_TRAINING = 7,         /* model cannot be fit */
  DFP_ERR_UNDEFINED_EFFECT = 8, /* requested statistic undefined */
  DFP_ERR_CONTRACT = 9,         /* caller broke a precondition */
  DFP_ERR_RUN_FAILED = 10,      /* >= 1 project failed; see run.log */
  DFP_ERR_UNKNOWN = 11
} dfp_status;

/* Library version as "major.minor.patch". */
DFP_API const char* dfp_version(void);

/* Stable identifier for a status value ("ok", "io", ...). */
DFP_API const char* dfp_status_name(dfp_status status);

/* Message of the last failing call on this thread; "" when the last
 * call succeeded. */
DFP_API const char* dfp_last_error(void);

/* Opaque experiment configuration: data root, release roster, planner
 * set, sampling and forest settings, master seed. */
typedef struct dfp_config dfp_config;

/* Parses a flat key=value config file (repeatable `project` lines).
 * On success *out owns a new handle; free with dfp_config_free. */
DFP_API dfp_status dfp_config_load(const char* path, dfp_config** out);

DFP_API void dfp_config_free(dfp_config* config);

/* Narrow the run to one project / planner already part of the config. */
DFP_API dfp_status dfp_config_select_project(dfp_config* config,
                                             const char* name);
DFP_API dfp_status dfp_config_select_planner(dfp_config* config,
                                             const char* name);

/* Resolved output directory; pointer valid until the config is freed
 * or modified. NULL for a null config. */
DFP_API const char* dfp_config_output_dir(const dfp_config* config);

/* Overrides for the matching config keys. */
DFP_API dfp_status dfp_config_set_seed(dfp_config* config, uint64_t seed);
DFP_API dfp_status dfp_config_set_data_root(dfp_config* config,
                                            const char* dir);
DFP_API dfp_status dfp_config_set_output_dir(dfp_config* config,
                                             const char* dir);

/* Runs every configured project x planner cell and writes summary.csv,
 * run.log, and the per-project report files under the output directory.
 * DFP_ERR_RUN_FAILED: some project failed but the run completed. */
DFP_API dfp_status dfp_run_experiment(const dfp_config* config);

/* Writes the bundled synthetic release corpus (8 projects x 3 releases)
 * under root, laid out as <root>/<project>/<version>.csv. */
DFP_API dfp_status dfp_write_fixture_data(const char* root);

#ifdef __cplusplus
}
#endif
