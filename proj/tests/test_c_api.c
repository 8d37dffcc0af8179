/* Copyright 2026 rtube contributors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Exercises the shared library through its C header only. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "rtube/rtube.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static const char* kConfig =
    "{\"tube_width\": 10, \"microstructure\": \"two-cheeks-one-bottom\", \"seed\": 5,"
    " \"n_steps\": 500, \"n_chains\": 200, \"tails\": {\"samples\": 100000}}";

static int lines_seen = 0;
static void count_lines(const char* line, void* user) {
  (void)line;
  ++*(int*)user;
}

static void test_config(void) {
  rtube_config* cfg = NULL;
  EXPECT(rtube_config_parse(kConfig, &cfg) == RTUBE_OK);
  const char* hash = NULL;
  EXPECT(rtube_config_hash(cfg, &hash) == RTUBE_OK);
  EXPECT(hash && strlen(hash) == 16);
  uint64_t seed = 0;
  EXPECT(rtube_config_get_seed(cfg, &seed) == RTUBE_OK && seed == 5);
  char before[17];
  strcpy(before, hash);
  EXPECT(rtube_config_set_seed(cfg, 6) == RTUBE_OK);
  EXPECT(rtube_config_hash(cfg, &hash) == RTUBE_OK);
  EXPECT(strcmp(before, hash) != 0);
  const char* canon = NULL;
  EXPECT(rtube_config_canonical(cfg, &canon) == RTUBE_OK && strstr(canon, "\"seed\":6") != NULL);
  rtube_config_free(cfg);

  cfg = NULL;
  EXPECT(rtube_config_parse("{\"tube_width\": 10}", &cfg) == RTUBE_CONFIG_ERROR);
  EXPECT(cfg == NULL);
  EXPECT(strstr(rtube_last_error(), "$.") != NULL);
  EXPECT(rtube_config_parse("not json", &cfg) == RTUBE_CONFIG_ERROR);
  EXPECT(rtube_config_load("/nonexistent/config.json", &cfg) == RTUBE_CONFIG_ERROR);
  EXPECT(rtube_config_parse(NULL, &cfg) == RTUBE_INVALID_ARGUMENT);
  rtube_config_free(NULL);
}

static void test_shape_and_map(void) {
  rtube_shape* shape = NULL;
  EXPECT(rtube_shape_preset("no-such-shape", &shape) != RTUBE_OK);
  EXPECT(rtube_shape_preset("two-cheeks-three-bottom", &shape) == RTUBE_OK);
  size_t arcs = 0;
  EXPECT(rtube_shape_arc_count(shape, &arcs) == RTUBE_OK && arcs == 5);
  int violation = -1;
  const char* report = NULL;
  EXPECT(rtube_shape_validate(shape, &violation, &report) == RTUBE_OK);
  EXPECT(violation == RTUBE_OK);
  EXPECT(report && report[0] == '{');

  rtube_map* map = NULL;
  EXPECT(rtube_map_create(shape, 10.0, NULL, &map) == RTUBE_OK);
  rtube_step st;
  EXPECT(rtube_map_step(map, 1.2, 0.3, &st) == RTUBE_OK);
  EXPECT(st.theta_out > 0.0 && st.theta_out < 3.15);
  EXPECT(fabs(st.x_disp - 10.0 / tan(st.theta_out)) < 1e-9 * (1.0 + fabs(st.x_disp)));
  EXPECT(st.n_collisions >= 1);
  EXPECT(rtube_map_step(map, 0.0, 0.3, &st) != RTUBE_OK);
  EXPECT(strlen(rtube_last_error()) > 0);
  const char* line = NULL;
  EXPECT(rtube_map_trace_json(map, 1.2, 0.3, &line) == RTUBE_OK && strstr(line, "\"events\"") != NULL);
  double d = 0.0;
  EXPECT(rtube_map_derivative(map, 1.2, 0.3, &d) == RTUBE_OK);
  EXPECT(fabs(d) > 1.0);

  rtube_map_options opt;
  rtube_map_options_default(&opt);
  EXPECT(opt.n_max == 64);
  rtube_map_free(map);
  rtube_shape_free(shape);

  shape = NULL;
  EXPECT(rtube_shape_parse("{\"preset\": \"two-cheeks-one-bottom\", \"tolerances\": {\"kappa_min\": 3}}", &shape) ==
         RTUBE_OK);
  EXPECT(rtube_shape_validate(shape, &violation, &report) == RTUBE_OK);
  EXPECT(violation == RTUBE_CURVATURE_OUT_OF_RANGE);
  map = NULL;
  EXPECT(rtube_map_create(shape, 10.0, NULL, &map) == RTUBE_CURVATURE_OUT_OF_RANGE);
  EXPECT(map == NULL);
  rtube_shape_free(shape);
  EXPECT(strcmp(rtube_status_name(RTUBE_CORNER_ANGLE_VIOLATION), "CornerAngleViolation") == 0);
}

static void test_ensemble(void) {
  rtube_shape* shape = NULL;
  rtube_map* map = NULL;
  EXPECT(rtube_shape_preset("two-cheeks-one-bottom", &shape) == RTUBE_OK);
  EXPECT(rtube_map_create(shape, 10.0, NULL, &map) == RTUBE_OK);
  const uint64_t cps[] = {10, 100};
  rtube_ensemble_params p = {7, 50, 200, cps, 2, 1};
  rtube_ensemble* a = NULL;
  rtube_ensemble* b = NULL;
  EXPECT(rtube_ensemble_run(map, &p, &a) == RTUBE_OK);
  p.workers = 4;
  EXPECT(rtube_ensemble_run(map, &p, &b) == RTUBE_OK);
  const uint64_t* values = NULL;
  size_t count = 0;
  EXPECT(rtube_ensemble_checkpoints(a, &values, &count) == RTUBE_OK && count == 3 && values[2] == 200);
  double sa[50], sb[50];
  EXPECT(rtube_ensemble_sums(a, 200, sa, 50) == RTUBE_OK);
  EXPECT(rtube_ensemble_sums(b, 200, sb, 50) == RTUBE_OK);
  EXPECT(memcmp(sa, sb, sizeof sa) == 0);
  EXPECT(rtube_ensemble_sums(a, 200, sa, 10) != RTUBE_OK);
  EXPECT(rtube_ensemble_sums(a, 55, sa, 50) != RTUBE_OK);
  rtube_ensemble_free(a);
  rtube_ensemble_free(b);
  rtube_map_free(map);
  rtube_shape_free(shape);
}

static void test_run(const char* dir) {
  rtube_config* cfg = NULL;
  EXPECT(rtube_config_parse(kConfig, &cfg) == RTUBE_OK);
  double tail = 0.0;
  EXPECT(rtube_tail_exact(10.0, 10.0, &tail) == RTUBE_OK);
  EXPECT(fabs(tail - 0.5 * (1.0 - 1.0 / sqrt(2.0))) < 1e-15);

  rtube_run_options o = {1, dir, 0, count_lines, &lines_seen};
  rtube_summary* s = NULL;
  EXPECT(rtube_run(cfg, "tails", &o, &s) == RTUBE_OK);
  EXPECT(rtube_summary_exit_code(s) == 0);
  EXPECT(rtube_summary_check_count(s) == 1);
  const char* id = NULL;
  const char* detail = NULL;
  int passed = 0;
  EXPECT(rtube_summary_check(s, 0, &id, &passed, &detail) == RTUBE_OK);
  EXPECT(strcmp(id, "tail_law") == 0 && passed == 1);
  const char* js = NULL;
  EXPECT(rtube_summary_json(s, &js) == RTUBE_OK && strstr(js, "\"config_hash\"") != NULL);
  EXPECT(rtube_summary_check(s, 5, &id, &passed, &detail) == RTUBE_INVALID_ARGUMENT);
  rtube_summary_free(s);
  EXPECT(lines_seen > 0);

  s = NULL;
  EXPECT(rtube_run(cfg, "plot", &o, &s) == RTUBE_INVALID_ARGUMENT);
  EXPECT(s == NULL);
  rtube_config_free(cfg);
}

int main(int argc, char** argv) {
  const char* dir = argc > 1 ? argv[1] : "c_api_out";
  EXPECT(strlen(rtube_version()) > 0);
  test_config();
  test_shape_and_map();
  test_ensemble();
  test_run(dir);
  if (failures) {
    fprintf(stderr, "%d failures\n", failures);
    return 1;
  }
  printf("c api: all checks passed\n");
  return 0;
}
