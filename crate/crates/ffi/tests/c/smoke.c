#include <math.h>
#include <stdio.h>
#include <string.h>

#include "curvlab.h"

#define CHECK(expr)                                                          \
  do {                                                                       \
    if (!(expr)) {                                                           \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #expr,         \
              curvlab_last_error());                                         \
      return 1;                                                              \
    }                                                                        \
  } while (0)

int main(void) {
  CurvlabContext *ctx = NULL;
  CHECK(curvlab_context_new(2, NULL, NULL, &ctx) == CURVLAB_STATUS_OK);
  CHECK(curvlab_context_dim(ctx) == 4);

  CurvlabTensor *t = NULL;
  CHECK(curvlab_tensor_model(ctx, 1.0, 4.0, &t) == CURVLAB_STATUS_OK);
  double k = 0, c = 0, res = 1;
  CHECK(curvlab_fit_model(t, &k, &c, &res) == CURVLAB_STATUS_OK);
  CHECK(fabs(k - 1.0) < 1e-12 && fabs(c - 4.0) < 1e-12 && res < 1e-12);

  double x[4] = {1, 0, 0, 0};
  double h = 0;
  CHECK(curvlab_holomorphic_sectional_curvature(t, x, &h) == CURVLAB_STATUS_OK);
  CHECK(fabs(h - 4.0) < 1e-12);

  char *json = NULL;
  CHECK(curvlab_tensor_to_json(t, 1, &json) == CURVLAB_STATUS_OK);
  CurvlabTensor *back = NULL;
  CHECK(curvlab_tensor_from_json(json, &back) == CURVLAB_STATUS_OK);
  curvlab_string_free(json);

  CHECK(curvlab_tensor_from_json("{\"dim\": 3, \"R\": []}", &back) == CURVLAB_STATUS_PARSE);
  CHECK(strstr(curvlab_last_error(), "dim") != NULL);

  int holds = 0;
  CHECK(curvlab_verify("A", 2, 0, 0, &holds, NULL) == CURVLAB_STATUS_OK);
  CHECK(holds == 1);

  curvlab_tensor_free(back);
  curvlab_tensor_free(t);
  curvlab_context_free(ctx);
  printf("ok %s\n", curvlab_version());
  return 0;
}
