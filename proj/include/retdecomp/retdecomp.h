/* C interface to the retdecomp library. Every call returns an rd_status;
 * on failure rd_last_error() describes the problem (thread-local, valid
 * until the next call on the same thread). Strings returned through
 * char** are owned by the caller and released with rd_string_free. */
#ifndef RETDECOMP_H
#define RETDECOMP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(RETDECOMP_BUILDING)
#define RD_API __attribute__((visibility("default")))
#else
#define RD_API
#endif

typedef enum rd_status {
    RD_OK = 0,
    RD_ERR_CONFIG = 1,   /* invalid configuration or arguments */
    RD_ERR_USAGE = 2,    /* NULL argument or call made in the wrong state */
    RD_ERR_NUMERIC = 3,  /* divergence, non-finite values */
    RD_ERR_IO = 4,
    RD_ERR_INTERNAL = 5
} rd_status;

typedef struct rd_config rd_config;
typedef struct rd_checkpoint rd_checkpoint;

typedef struct rd_metrics {
    long step;
    double avg_return;
    double l_rew;
    double l_dyn;
    double l_sp;
    double s_zr;
    double s_zr_sample;
    double f1_sr;
    double f1_ss;
    double pearson_r;     /* NaN when undefined */
    int pearson_defined;
    long gradient_steps;
    double wall_seconds;
} rd_metrics;

typedef void (*rd_metrics_fn)(const rd_metrics* record, void* user);

RD_API const char* rd_version(void);
RD_API const char* rd_last_error(void);
RD_API const char* rd_status_name(rd_status status);
RD_API void rd_string_free(char* s);

/* Configs start from a named preset ("desk", "distractor", "full"), INI
 * text or an INI file, and are edited key by key ("model.lambda1"). */
RD_API rd_status rd_config_preset(const char* name, rd_config** out);
RD_API rd_status rd_config_parse(const char* ini_text, rd_config** out);
RD_API rd_status rd_config_load(const char* path, rd_config** out);
RD_API rd_status rd_config_set(rd_config* config, const char* key, const char* value);
RD_API rd_status rd_config_get(const rd_config* config, const char* key, char** value);
RD_API rd_status rd_config_to_ini(const rd_config* config, char** ini_text);
RD_API rd_status rd_config_hash(const rd_config* config, char** hex);
RD_API void rd_config_free(rd_config* config);

/* Writes the environment spec the config describes as JSON. */
RD_API rd_status rd_config_write_env(const rd_config* config, const char* path);

/* Runs the training schedule. out_dir may be NULL (nothing written);
 * otherwise metrics.csv, metrics_aux.csv, run.json, env.json and
 * checkpoint/ are created there. on_record may be NULL. */
RD_API rd_status rd_train(const rd_config* config, const char* out_dir, rd_metrics_fn on_record, void* user);

RD_API rd_status rd_checkpoint_load(const char* dir, rd_checkpoint** out);
RD_API void rd_checkpoint_free(rd_checkpoint* ckpt);

/* Evaluation JSON for the checkpoint on the env spec stored at env_path.
 * env_path NULL uses the env the checkpoint was trained on. */
RD_API rd_status rd_evaluate(const rd_checkpoint* ckpt, const char* env_path, int n_rollouts, uint64_t seed,
                             char** json);

/* Mask heatmaps, reward comparison and probability dump; metrics_csv may be
 * NULL. */
RD_API rd_status rd_render(const rd_checkpoint* ckpt, const char* out_dir, const char* metrics_csv);

/* Trains once per (value, seed); writes sweep.csv, sweep_table.md and the
 * per-run outputs under out_dir (required). */
RD_API rd_status rd_sweep(const rd_config* base, const char* param, const char* const* values, size_t n_values,
                          const uint64_t* seeds, size_t n_seeds, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
