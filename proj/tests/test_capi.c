/* Exercises the C interface from C. */
#include <stdio.h>
#include <string.h>

#include "vwlab/vwlab.h"

static int failures = 0;

#define EXPECT(cond)                                          \
  do {                                                        \
    if (!(cond)) {                                            \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                             \
    }                                                         \
  } while (0)

static void count_line(const char* line, void* user) {
  (void)line;
  ++*(int*)user;
}

int main(void) {
  vwlab_config* cfg = NULL;
  vwlab_state* state = NULL;
  char* text = NULL;
  int passed = 0, lines = 0, converged = 0;
  double norm = -1.0;
  size_t sites = 0;

  EXPECT(strlen(vwlab_version()) > 0);
  EXPECT(vwlab_config_parse("{\"grid\":[3,3,3,3],\"bogus\":1}", &cfg) == VWLAB_ERR_CONFIG);
  EXPECT(strstr(vwlab_last_error(), "bogus") != NULL);
  EXPECT(vwlab_config_parse("{\"grid\":[3,3,3,3],\"init\":{\"kind\":\"random\",\"amplitude\":1e-3}}", &cfg) ==
         VWLAB_OK);

  const int bad_dims[4] = {2, 3, 3, 3};
  EXPECT(vwlab_config_set_grid(cfg, bad_dims) == VWLAB_ERR_CONFIG);
  EXPECT(vwlab_config_set_output(cfg, "nowhere", "x") == VWLAB_ERR_ARGUMENT);

  EXPECT(vwlab_verify_lemma(10, 1, 1, NULL, count_line, &lines, &passed) == VWLAB_OK);
  EXPECT(passed == 1 && lines == 0);
  EXPECT(vwlab_verify_lemma(10, 1, 1, "det-formula", count_line, &lines, &passed) == VWLAB_OK);
  EXPECT(passed == 0 && lines > 0);
  EXPECT(vwlab_check_ops(cfg, NULL, NULL, NULL, &passed) == VWLAB_OK && passed == 1);

  EXPECT(vwlab_state_create(cfg, &state) == VWLAB_OK);
  EXPECT(vwlab_state_sites(state, &sites) == VWLAB_OK && sites == 81);
  lines = 0;
  EXPECT(vwlab_solve(cfg, state, count_line, &lines, &converged, &text) == VWLAB_OK);
  EXPECT(converged == 1 && lines > 0);
  EXPECT(text && strstr(text, "\"converged\":true"));
  vwlab_string_free(text);
  EXPECT(vwlab_state_residual_norm(state, &norm) == VWLAB_OK && norm <= 1e-8);

  EXPECT(vwlab_probe(cfg, state, 2, &text) == VWLAB_OK);
  EXPECT(text && strstr(text, "\"sigma_min\""));
  vwlab_string_free(text);
  EXPECT(vwlab_stratify(cfg, state, &text) == VWLAB_OK);
  vwlab_string_free(text);

  EXPECT(vwlab_state_read("/nonexistent/file.vwf1", cfg, NULL) == VWLAB_ERR_ARGUMENT);
  vwlab_state* other = NULL;
  EXPECT(vwlab_state_read("/nonexistent/file.vwf1", cfg, &other) == VWLAB_ERR_IO);
  EXPECT(vwlab_set_threads(0) == VWLAB_ERR_ARGUMENT);

  vwlab_state_free(state);
  vwlab_config_free(cfg);
  vwlab_config_free(NULL);
  if (failures) fprintf(stderr, "%d C API checks failed\n", failures);
  return failures ? 1 : 0;
}
