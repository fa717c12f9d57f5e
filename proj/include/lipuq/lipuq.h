#ifndef LIPUQ_LIPUQ_H
#define LIPUQ_LIPUQ_H

/* C interface to lipuq. Problems and results are opaque handles; every call
   that can fail returns a status code and leaves a message for
   lipuq_last_error() on the calling thread. Strings returned by the library
   stay valid until the owning handle is freed. */

#include <stddef.h>

#if defined(LIPUQ_BUILDING_LIBRARY)
#define LIPUQ_API __attribute__((visibility("default")))
#else
#define LIPUQ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lipuq_status {
  LIPUQ_OK = 0,
  LIPUQ_INFEASIBLE = 1, /* data or problem admit no feasible point */
  LIPUQ_USAGE = 2,      /* malformed configuration or bad argument */
  LIPUQ_IO = 3,         /* file could not be read or written */
  LIPUQ_INTERNAL = 4
} lipuq_status;

typedef struct lipuq_problem lipuq_problem;
typedef struct lipuq_result lipuq_result;

LIPUQ_API const char* lipuq_version(void);

/* Message of the last failed call on this thread; "" if none. */
LIPUQ_API const char* lipuq_last_error(void);

/* Parses a JSON run configuration. Relative dataset paths are taken
   relative to the working directory. */
LIPUQ_API lipuq_status lipuq_problem_create(const char* config_json, lipuq_problem** out);
LIPUQ_API void lipuq_problem_free(lipuq_problem* problem);

/* The configuration as the library understood it, all defaults filled in. */
LIPUQ_API const char* lipuq_problem_config_json(const lipuq_problem* problem);

/* Runs the configured command. An infeasible problem still yields a result
   (its report says so) and returns LIPUQ_INFEASIBLE. */
LIPUQ_API lipuq_status lipuq_problem_run(lipuq_problem* problem, lipuq_result** out);

LIPUQ_API void lipuq_result_free(lipuq_result* result);
LIPUQ_API const char* lipuq_result_json(const lipuq_result* result);
/* 0 on success, 1 when the problem was infeasible. */
LIPUQ_API int lipuq_result_outcome(const lipuq_result* result);
LIPUQ_API const char* lipuq_result_table_csv(const lipuq_result* result);

LIPUQ_API size_t lipuq_result_trace_count(const lipuq_result* result);
LIPUQ_API const char* lipuq_result_trace_name(const lipuq_result* result, size_t index);
/* Writes trace `index` as CSV (generation,best_value,feasibility_residual). */
LIPUQ_API lipuq_status lipuq_result_trace_write(const lipuq_result* result, size_t index,
                                                const char* path);
/* The same CSV as a string. */
LIPUQ_API const char* lipuq_result_trace_csv(const lipuq_result* result, size_t index);

#ifdef __cplusplus
}
#endif

#endif
