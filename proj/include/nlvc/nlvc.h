/* C interface to the nonlocal volume-constraint solver. */
#ifndef NLVC_NLVC_H
#define NLVC_NLVC_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(NLVC_BUILDING)
#define NLVC_API __declspec(dllexport)
#else
#define NLVC_API __declspec(dllimport)
#endif
#else
#define NLVC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nlvc_status {
  NLVC_OK = 0,
  NLVC_ERR_CONFIG = 1,
  NLVC_ERR_DOMAIN = 2,
  NLVC_ERR_QUADRATURE = 3,
  NLVC_ERR_ASSEMBLY = 4,
  NLVC_ERR_NUMERIC = 5,
  NLVC_ERR_LOOKUP = 6,
  NLVC_ERR_INVALID_ARGUMENT = 20,
  NLVC_ERR_BUFFER_TOO_SMALL = 21,
  NLVC_ERR_INTERNAL = 99
} nlvc_status;

typedef struct nlvc_experiment nlvc_experiment;
typedef struct nlvc_report nlvc_report;

typedef struct nlvc_level_info {
  double delta;
  double h;
  size_t points;
  size_t unknowns;
  double e0;
  double rate; /* valid only when has_rate != 0 */
  int has_rate;
  size_t iterations;
  double residual;
  double seconds;
} nlvc_level_info;

NLVC_API const char* nlvc_version(void);

/* Message of the last failed call on the calling thread ("" if none). */
NLVC_API const char* nlvc_last_error(void);

NLVC_API const char* nlvc_status_string(nlvc_status status);

/* Caps the worker threads used by assembly and sparse products (n >= 1). */
NLVC_API nlvc_status nlvc_set_threads(int n);

/* model: "poisson" or "lps". The experiment starts from the model defaults. */
NLVC_API nlvc_status nlvc_experiment_create(const char* model, nlvc_experiment** out);
NLVC_API void nlvc_experiment_destroy(nlvc_experiment* exp);

/* Keys: strategy, case, delta0, ratio, levels, loc_mode, nu, E,
 * local_provider, fd_refinement, norm_region, solver, tol, max_iter, restart,
 * equilibrate, degree, moment_refinement, bond_quartic, weight_cache,
 * matrix_export. */
NLVC_API nlvc_status nlvc_experiment_set(nlvc_experiment* exp, const char* key, const char* value);

NLVC_API nlvc_status nlvc_run_consistency(const nlvc_experiment* exp, nlvc_report** out);
NLVC_API nlvc_status nlvc_run_convergence(const nlvc_experiment* exp, nlvc_report** out);

NLVC_API void nlvc_report_destroy(nlvc_report* report);
NLVC_API int nlvc_report_passed(const nlvc_report* report);
NLVC_API size_t nlvc_report_level_count(const nlvc_report* report);
NLVC_API nlvc_status nlvc_report_level(const nlvc_report* report, size_t level, nlvc_level_info* out);

/* format: "csv" or "json". Writes a NUL-terminated string into buf when it
 * fits; *needed (optional) receives the size including the terminator. */
NLVC_API nlvc_status nlvc_report_format(const nlvc_report* report, const char* format, char* buf, size_t capacity,
                                        size_t* needed);

#ifdef __cplusplus
}
#endif

#endif
