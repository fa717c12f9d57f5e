/* Exercises the C API from plain C. */
#include <stdio.h>
#include <string.h>

#include "lipuq/lipuq.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static const char* kPof =
    "{\"command\":\"pof\",\"domain\":[[0,1]],\"lipschitz\":[1],\"mean\":0.5,\"theta\":0,"
    "\"solver\":{\"restarts\":1},"
    "\"data\":{\"labels\":[\"z\"],\"points\":[[0.375]],\"values\":[0.25]}}";

static const char* kBad =
    "{\"command\":\"validate\",\"domain\":[[0,1]],\"lipschitz\":[1],"
    "\"data\":{\"labels\":[\"a\",\"b\"],\"points\":[[0],[1]],\"values\":[0,2]}}";

int main(void) {
  lipuq_problem* p = NULL;
  lipuq_result* r = NULL;

  EXPECT(strcmp(lipuq_version(), "0.1.0") == 0);

  EXPECT(lipuq_problem_create("{not json", &p) == LIPUQ_USAGE);
  EXPECT(p == NULL);
  EXPECT(strlen(lipuq_last_error()) > 0);
  EXPECT(lipuq_problem_create(kPof, NULL) == LIPUQ_USAGE);
  EXPECT(lipuq_problem_run(NULL, &r) == LIPUQ_USAGE);

  EXPECT(lipuq_problem_create(kPof, &p) == LIPUQ_OK);
  EXPECT(strstr(lipuq_problem_config_json(p), "\"pof\"") != NULL);
  EXPECT(lipuq_problem_run(p, &r) == LIPUQ_OK);
  EXPECT(lipuq_result_outcome(r) == 0);
  EXPECT(strstr(lipuq_result_json(r), "\"phat\"") != NULL);
  EXPECT(lipuq_result_trace_count(r) == 1);
  EXPECT(strcmp(lipuq_result_trace_name(r, 0), "pof") == 0);
  EXPECT(strncmp(lipuq_result_trace_csv(r, 0), "generation,best_value", 21) == 0);
  EXPECT(lipuq_result_trace_name(r, 5) == NULL);
  EXPECT(lipuq_result_trace_write(r, 0, "/nonexistent/dir/t.csv") == LIPUQ_IO);
  lipuq_result_free(r);
  lipuq_problem_free(p);

  p = NULL;
  r = NULL;
  EXPECT(lipuq_problem_create(kBad, &p) == LIPUQ_OK);
  EXPECT(lipuq_problem_run(p, &r) == LIPUQ_INFEASIBLE);
  EXPECT(r != NULL);
  if (r) {
    EXPECT(lipuq_result_outcome(r) == 1);
    EXPECT(strstr(lipuq_result_json(r), "\"infeasible\"") != NULL);
  }
  lipuq_result_free(r);
  lipuq_problem_free(p);

  lipuq_result_free(NULL);
  lipuq_problem_free(NULL);

  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  else printf("C API: all checks passed\n");
  return failures ? 1 : 0;
}
