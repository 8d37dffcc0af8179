/* Copyright 2026 rtube contributors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the random-billiard tube library.
 *
 * Every function returns an rtube_status; 0 means success. On failure the
 * message of the most recent error on the calling thread is available from
 * rtube_last_error(). Objects are opaque handles created by *_create / *_load
 * functions and released by the matching *_free, which accepts NULL.
 * Strings returned by the library are owned by the handle they came from and
 * stay valid until that handle is freed or the next call that refreshes them.
 */
#ifndef RTUBE_RTUBE_H
#define RTUBE_RTUBE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RTUBE_API __declspec(dllexport)
#else
#define RTUBE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rtube_status {
  RTUBE_OK = 0,
  RTUBE_TANGENCY_VIOLATION = 1,
  RTUBE_CORNER_ANGLE_VIOLATION = 2,
  RTUBE_NORMAL_CONE_VIOLATION = 3,
  RTUBE_CURVATURE_OUT_OF_RANGE = 4,
  RTUBE_OPEN_BOUNDARY = 5,
  RTUBE_NO_INTERSECTION = 6,
  RTUBE_COLLISION_CAP_EXCEEDED = 7,
  RTUBE_GRAZING_DEGENERATE = 8,
  RTUBE_SINGULAR_COLLISION = 9,
  RTUBE_SINGULAR_FLIGHT = 10,
  RTUBE_BRANCH_BOUNDARY = 11,
  RTUBE_DOMAIN_ERROR = 12,
  RTUBE_EMPTY_SAMPLE = 13,
  RTUBE_INSUFFICIENT_DATA = 14,
  RTUBE_NOISE_FLOOR = 15,
  RTUBE_CELL_STARVED = 16,
  RTUBE_NO_CONVERGENCE = 17,
  RTUBE_CONFIG_ERROR = 18,
  RTUBE_IO_ERROR = 19,
  RTUBE_INVALID_ARGUMENT = 20,
  RTUBE_INTERNAL_ERROR = 99
} rtube_status;

typedef struct rtube_config rtube_config;
typedef struct rtube_shape rtube_shape;
typedef struct rtube_map rtube_map;
typedef struct rtube_ensemble rtube_ensemble;
typedef struct rtube_summary rtube_summary;

/* Library version string, e.g. "0.1.0". */
RTUBE_API const char* rtube_version(void);
/* Name of a status code, e.g. "CornerAngleViolation". */
RTUBE_API const char* rtube_status_name(int status);
/* Message of the last failed call on this thread ("" if none). */
RTUBE_API const char* rtube_last_error(void);

/* ---- configuration ---------------------------------------------------- */

RTUBE_API int rtube_config_load(const char* path, rtube_config** out);
RTUBE_API int rtube_config_parse(const char* json_text, rtube_config** out);
RTUBE_API void rtube_config_free(rtube_config* cfg);
/* Applies TUBE_SEED from the environment when it is set. */
RTUBE_API int rtube_config_apply_env(rtube_config* cfg);
RTUBE_API int rtube_config_set_seed(rtube_config* cfg, uint64_t seed);
RTUBE_API int rtube_config_get_seed(const rtube_config* cfg, uint64_t* seed);
RTUBE_API int rtube_config_set_output_dir(rtube_config* cfg, const char* dir);
/* 16 hex digits; owned by cfg. */
RTUBE_API int rtube_config_hash(rtube_config* cfg, const char** hash);
/* Canonical JSON of the configuration; owned by cfg. */
RTUBE_API int rtube_config_canonical(rtube_config* cfg, const char** json_text);

/* ---- geometry and the angle map -------------------------------------- */

RTUBE_API int rtube_shape_preset(const char* name, rtube_shape** out);
/* Accepts the "microstructure" value of a config document. */
RTUBE_API int rtube_shape_parse(const char* json_text, rtube_shape** out);
RTUBE_API void rtube_shape_free(rtube_shape* shape);
/* Validation report as JSON (owned by shape). The call succeeds even when the
 * shape is invalid; *violation receives the violated condition or RTUBE_OK. */
RTUBE_API int rtube_shape_validate(rtube_shape* shape, int* violation, const char** report_json);
RTUBE_API int rtube_shape_arc_count(const rtube_shape* shape, size_t* count);

typedef struct rtube_map_options {
  int n_max;        /* collision cap per visit, default 64 */
  double sin_floor; /* default 1e-12 */
  double eta;       /* near-grazing threshold, default 0.1 */
} rtube_map_options;

RTUBE_API void rtube_map_options_default(rtube_map_options* opt);
/* opt may be NULL for defaults. Fails with the shape's violation code. */
RTUBE_API int rtube_map_create(const rtube_shape* shape, double width, const rtube_map_options* opt,
                               rtube_map** out);
RTUBE_API void rtube_map_free(rtube_map* map);

typedef struct rtube_step {
  double theta_out;
  int64_t xi;          /* integer cell displacement */
  double x_disp;       /* W / tan(theta_out) */
  int n_collisions;
} rtube_step;

RTUBE_API int rtube_map_step(const rtube_map* map, double theta, double R, rtube_step* out);
/* d theta_out / d theta from the Jacobian chain. */
RTUBE_API int rtube_map_derivative(const rtube_map* map, double theta, double R, double* out);
/* One visit as a JSON line (fields R, theta_in, theta_out, events). Owned by map. */
RTUBE_API int rtube_map_trace_json(rtube_map* map, double theta, double R, const char** json_line);

/* ---- statistics ------------------------------------------------------- */

/* mu(W / tan(theta) > N). */
RTUBE_API int rtube_tail_exact(double N, double width, double* out);

typedef struct rtube_ensemble_params {
  uint64_t seed;
  uint64_t n_chains;
  uint64_t n_steps;
  const uint64_t* checkpoints; /* may be NULL; n_steps is always included */
  size_t n_checkpoints;
  unsigned workers;            /* 0 = all hardware threads */
} rtube_ensemble_params;

/* Offsets R are uniform on [0, 1]. */
RTUBE_API int rtube_ensemble_run(const rtube_map* map, const rtube_ensemble_params* params, rtube_ensemble** out);
RTUBE_API void rtube_ensemble_free(rtube_ensemble* e);
RTUBE_API int rtube_ensemble_checkpoints(const rtube_ensemble* e, const uint64_t** values, size_t* count);
/* Copies S_n for every chain at checkpoint n into out[0 .. n_chains). */
RTUBE_API int rtube_ensemble_sums(const rtube_ensemble* e, uint64_t n, double* out, size_t capacity);
/* Little-endian float64 dump, row-major [chain][checkpoint]. */
RTUBE_API int rtube_ensemble_write(const rtube_ensemble* e, const char* path);

/* ---- pipelines -------------------------------------------------------- */

typedef void (*rtube_log_fn)(const char* line, void* user);

typedef struct rtube_run_options {
  unsigned workers;    /* 0 = all hardware threads */
  const char* out_dir; /* NULL or "": the config's output_dir */
  int dump_traces;
  rtube_log_fn log;    /* may be NULL */
  void* log_user;
} rtube_run_options;

/* Runs "validate", "simulate", "tails", "clt", "spectrum", "diagnostics" or
 * "all". A summary is produced whenever the command ran, even if checks
 * failed; its exit code follows the command-line convention (0 all checks
 * passed, 1 config, 2 validation, 3 collision cap, 4 check failed, 5 other). */
RTUBE_API int rtube_run(const rtube_config* cfg, const char* command, const rtube_run_options* opt,
                        rtube_summary** out);
RTUBE_API void rtube_summary_free(rtube_summary* s);
RTUBE_API int rtube_summary_exit_code(const rtube_summary* s);
RTUBE_API size_t rtube_summary_check_count(const rtube_summary* s);
/* Check i: stable id, pass flag and a one-line detail; strings owned by s. */
RTUBE_API int rtube_summary_check(const rtube_summary* s, size_t i, const char** id, int* passed,
                                  const char** detail);
RTUBE_API int rtube_summary_json(rtube_summary* s, const char** json_text);

#ifdef __cplusplus
}
#endif

#endif /* RTUBE_RTUBE_H */
