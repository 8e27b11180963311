/* C interface to the lattice workbench. Every call returns a vwlab_status;
 * on failure vwlab_last_error() describes the error for the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * vwlab_string_free. */
#ifndef VWLAB_H
#define VWLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(VWLAB_BUILD)
#define VWLAB_API __attribute__((visibility("default")))
#else
#define VWLAB_API
#endif

typedef enum vwlab_status {
  VWLAB_OK = 0,
  VWLAB_ERR_ARGUMENT = 1,    /* invalid argument or option */
  VWLAB_ERR_CONFIG = 2,      /* malformed or out-of-range run configuration */
  VWLAB_ERR_FORMAT = 3,      /* malformed VWF1 container */
  VWLAB_ERR_IO = 4,          /* file could not be opened or written */
  VWLAB_ERR_GRID = 5,        /* fields on different grids */
  VWLAB_ERR_DIVERGENCE = 6,  /* non-finite energy during a solve */
  VWLAB_ERR_CONVERGENCE = 7, /* eigensolver did not converge */
  VWLAB_ERR_RESOURCE = 8,    /* problem too large to materialize */
  VWLAB_ERR_INTERNAL = 9
} vwlab_status;

typedef struct vwlab_config vwlab_config;
typedef struct vwlab_state vwlab_state;

/* Receives one machine-readable line (no trailing newline). */
typedef void (*vwlab_line_fn)(const char* line, void* user);

VWLAB_API const char* vwlab_version(void);
VWLAB_API const char* vwlab_last_error(void);
VWLAB_API const char* vwlab_status_name(vwlab_status status);
VWLAB_API void vwlab_string_free(char* s);

/* Caps worker threads; results do not depend on the count. */
VWLAB_API vwlab_status vwlab_set_threads(int threads);

VWLAB_API vwlab_status vwlab_config_default(vwlab_config** out);
VWLAB_API vwlab_status vwlab_config_parse(const char* json, vwlab_config** out);
VWLAB_API vwlab_status vwlab_config_load(const char* path, vwlab_config** out);
VWLAB_API vwlab_status vwlab_config_set_grid(vwlab_config* cfg, const int dims[4]);
VWLAB_API vwlab_status vwlab_config_set_seed(vwlab_config* cfg, uint64_t seed);
/* which is "config", "history" or "report"; an unset path is "". */
VWLAB_API vwlab_status vwlab_config_set_output(vwlab_config* cfg, const char* which, const char* path);
VWLAB_API vwlab_status vwlab_config_get_output(const vwlab_config* cfg, const char* which, const char** path);
VWLAB_API vwlab_status vwlab_config_to_json(const vwlab_config* cfg, char** out);
VWLAB_API void vwlab_config_free(vwlab_config* cfg);

/* A state holds tau and a configuration (A, B, C). */
VWLAB_API vwlab_status vwlab_state_create(const vwlab_config* cfg, vwlab_state** out);
/* Reads a VWF1 file; when it carries no tau, tau follows cfg on the file's grid. */
VWLAB_API vwlab_status vwlab_state_read(const char* path, const vwlab_config* cfg, vwlab_state** out);
VWLAB_API vwlab_status vwlab_state_write(const vwlab_state* state, const char* path, int include_tau);
VWLAB_API vwlab_status vwlab_state_sites(const vwlab_state* state, size_t* sites);
VWLAB_API vwlab_status vwlab_state_residual_norm(const vwlab_state* state, double* norm);
VWLAB_API void vwlab_state_free(vwlab_state* state);

/* Suites report failures line by line; *passed is 1 when nothing failed. */
VWLAB_API vwlab_status vwlab_verify_lemma(int samples, uint64_t seed, int exact, const char* fault,
                                          vwlab_line_fn on_failure, void* user, int* passed);
VWLAB_API vwlab_status vwlab_check_ops(const vwlab_config* cfg, const char* fault, vwlab_line_fn on_failure,
                                       void* user, int* passed);

/* Minimizes the residual in place, one JSON record per iteration. */
VWLAB_API vwlab_status vwlab_solve(const vwlab_config* cfg, vwlab_state* state, vwlab_line_fn on_record, void* user,
                                   int* converged, char** summary_json);

/* k <= 0 uses the configured k. */
VWLAB_API vwlab_status vwlab_probe(const vwlab_config* cfg, const vwlab_state* state, int k, char** report_json);
VWLAB_API vwlab_status vwlab_stratify(const vwlab_config* cfg, const vwlab_state* state, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* VWLAB_H */
