/* C interface to the tropical-cyclone structural forecasting library.
 *
 * Every call returns a tcsf_status; on failure the message is available from
 * tcsf_last_error() on the same thread until the next failing call. Objects
 * are opaque and released with their matching *_free function.
 *
 * Trajectory arrays are row-major (row, radial bin, quadrant) doubles in degC,
 * 80 bins of 5 km and quadrants in the order NE, NW, SW, SE. */
#ifndef TCSF_H
#define TCSF_H

#include <stddef.h>
#include <stdint.h>

#if defined(TCSF_BUILDING_LIBRARY)
#define TCSF_API __attribute__((visibility("default")))
#else
#define TCSF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tcsf_status {
  TCSF_OK = 0,
  TCSF_ERR_INVALID_ARGUMENT = 1,
  TCSF_ERR_PARSE = 2,
  TCSF_ERR_IO = 3,
  TCSF_ERR_CONFIG = 4,
  TCSF_ERR_SHAPE = 5,
  TCSF_ERR_DOMAIN = 6,
  TCSF_ERR_STATE = 7,
  TCSF_ERR_INTERNAL = 8
} tcsf_status;

#define TCSF_RADIAL_BINS 80
#define TCSF_QUADRANTS 4
#define TCSF_OBSERVED_ROWS 13

typedef struct tcsf_config tcsf_config;
typedef struct tcsf_result tcsf_result;
typedef struct tcsf_structsim tcsf_structsim;
typedef struct tcsf_nowcast tcsf_nowcast;

TCSF_API const char* tcsf_version(void);
TCSF_API const char* tcsf_last_error(void);
TCSF_API const char* tcsf_status_name(tcsf_status status);
/* Frees strings returned through char** out-parameters. */
TCSF_API void tcsf_string_free(char* s);

/* ---- configuration ---- */
TCSF_API tcsf_status tcsf_config_new(tcsf_config** out);
/* Reads a JSON config file over the defaults; unknown keys are rejected. */
TCSF_API tcsf_status tcsf_config_load(const char* path, tcsf_config** out);
/* Applies a JSON fragment (same schema) over the current values. */
TCSF_API tcsf_status tcsf_config_merge_json(tcsf_config* config, const char* json_text);
/* NULL leaves a path unchanged. */
TCSF_API tcsf_status tcsf_config_set_paths(tcsf_config* config, const char* data_dir, const char* output_dir);
TCSF_API tcsf_status tcsf_config_validate(const tcsf_config* config);
TCSF_API tcsf_status tcsf_config_dump(const tcsf_config* config, char** json_out);
/* 16 hex digits plus terminator: buffer of at least 17 bytes. */
TCSF_API tcsf_status tcsf_config_hash(const tcsf_config* config, char* buffer, size_t size);
TCSF_API void tcsf_config_free(tcsf_config* config);

/* ---- commands ---- */
typedef struct tcsf_command_args {
  const char* storm;   /* NULL: unset */
  const char* time;    /* ISO-8601 UTC, e.g. 2001-08-03T12:00Z; NULL: unset */
  int lead_h;          /* 0: unset */
  int members;         /* 0: unset */
  int has_seed;
  uint64_t seed;
  const char* split;   /* NULL: "test" */
  const char* records; /* NULL: unset */
} tcsf_command_args;

TCSF_API void tcsf_command_args_init(tcsf_command_args* args);
/* Commands: ingest, synth, extract-orb, train-sim, train-nowcast, forecast,
 * verify, explain, render. */
TCSF_API tcsf_status tcsf_run_command(const tcsf_config* config, const char* command, const tcsf_command_args* args,
                                      tcsf_result** out);
TCSF_API const char* tcsf_result_summary(const tcsf_result* result);
TCSF_API size_t tcsf_result_output_count(const tcsf_result* result);
TCSF_API const char* tcsf_result_output(const tcsf_result* result, size_t index);
TCSF_API void tcsf_result_free(tcsf_result* result);

/* ---- models ---- */
TCSF_API tcsf_status tcsf_structsim_load(const char* checkpoint, tcsf_structsim** out);
TCSF_API void tcsf_structsim_free(tcsf_structsim* model);
/* observed: 13 x 80 x 4 ending at the anchor; out: steps x 80 x 4 per member,
 * members back to back. Member i uses the stream derived from (seed, i). */
TCSF_API tcsf_status tcsf_structsim_simulate(const tcsf_structsim* model, const double* observed, int steps,
                                             int members, uint64_t seed, double* out);
/* Mean per-pixel negative log-likelihood (degC space) of one window of
 * `rows` rows (at most the model's window height). */
TCSF_API tcsf_status tcsf_structsim_nll(const tcsf_structsim* model, const double* window, int rows, double* out);

TCSF_API tcsf_status tcsf_nowcast_load(const char* checkpoint, tcsf_nowcast** out);
TCSF_API void tcsf_nowcast_free(tcsf_nowcast* model);
TCSF_API size_t tcsf_nowcast_persistence_size(const tcsf_nowcast* model);
/* traj13: 13 x 80 x 4; persistence: Y(t-30..t-6 h) then the intensity changes. */
TCSF_API tcsf_status tcsf_nowcast_predict(const tcsf_nowcast* model, const double* traj13, const double* persistence,
                                          size_t n_persistence, double* out_kt);

/* ---- scores ---- */
TCSF_API tcsf_status tcsf_intensity_score(const double* predictions, const double* truths, size_t n, double* rmse,
                                          double* mae, double* bias);

#ifdef __cplusplus
}
#endif

#endif
