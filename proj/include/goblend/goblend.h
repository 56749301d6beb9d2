/*
 * goblend C API: archive-driven exploration of a deterministic 2D racing
 * game, with persona extraction from playtraces and blended behavior /
 * arousal imitation rewards.
 *
 * All functions return gb_status; on failure gb_last_error() holds a
 * thread-local description. Handles are opaque and must be released with
 * their matching *_free function.
 */
#ifndef GOBLEND_H
#define GOBLEND_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gb_status {
    GB_OK = 0,
    GB_ERR_INVALID_ARGUMENT = 1,
    GB_ERR_IO = 2,
    GB_ERR_PARSE = 3,
    GB_ERR_VALIDATION = 4,
    GB_ERR_CONTRACT = 5,
    GB_ERR_INTERNAL = 6
} gb_status;

const char* gb_version(void);
/* Last failure message on this thread; empty string if none. */
const char* gb_last_error(void);

/* ------------------------------------------------------------------ */
/* Track                                                               */

typedef struct gb_track gb_track;

gb_status gb_track_default(gb_track** out);
gb_status gb_track_load(const char* path, gb_track** out);
gb_status gb_track_save(const gb_track* track, const char* path);
void gb_track_free(gb_track* track);

int gb_track_segment_count(const gb_track* track);
int gb_track_sub_segment_count(const gb_track* track);
int gb_track_checkpoints_per_lap(const gb_track* track);
long long gb_track_cell_key_space(const gb_track* track);
double gb_track_lap_length(const gb_track* track);

/* ------------------------------------------------------------------ */
/* Environment                                                         */

typedef struct gb_env gb_env;

#define GB_FEATURE_COUNT 24

gb_status gb_env_create(const gb_track* track, uint64_t seed, gb_env** out);
void gb_env_free(gb_env* env);
gb_status gb_env_reset(gb_env* env, uint64_t seed);
/* steer and gas must be in {-1, 0, 1}; stepping a finished episode fails
 * with GB_ERR_CONTRACT. */
gb_status gb_env_step(gb_env* env, int steer, int gas);

int gb_env_finished(const gb_env* env);
int gb_env_score(const gb_env* env);
int gb_env_lap(const gb_env* env);
int gb_env_window_index(const gb_env* env);
double gb_env_elapsed_s(const gb_env* env);

gb_status gb_env_features(const gb_env* env, double* out, size_t len);
gb_status gb_env_cell_key(const gb_env* env, int* lap, int* sub_segment, int* speed_bucket,
                          int* rotation_bucket, int* proximity);

/* Snapshot blobs are malloc'd; release with gb_buffer_free. */
gb_status gb_env_snapshot(const gb_env* env, uint8_t** blob, size_t* len);
gb_status gb_env_restore(gb_env* env, const uint8_t* blob, size_t len);
void gb_buffer_free(uint8_t* blob);

/* ------------------------------------------------------------------ */
/* Pipeline. config_path may be NULL for the built-in defaults.        */

/* Synthetic cohort -> playtrace CSV. */
gb_status gb_generate_cohort(const char* config_path, const char* out_csv);

/* Cluster a playtrace CSV into persona artifacts + dendrogram CSV. */
gb_status gb_cluster_personas(const char* config_path, const char* dataset_csv,
                              const char* out_dir);

/* One exploration experiment. persona is a persona artifact path, or the
 * literal "winner" / "random" for the baselines. lambda < 0, iterations <= 0,
 * k <= 0 or weighting NULL fall back to the config values. */
gb_status gb_explore(const char* config_path, const char* dataset_csv, const char* persona,
                     double lambda, uint64_t seed, long long iterations, int k,
                     const char* weighting, const char* out_dir);

/* Full protocol: every persona x lambda plus baselines, all seeds. */
gb_status gb_run_matrix(const char* config_path, const char* dataset_csv,
                        const char* personas_dir, const char* out_dir);

/* Recompute results.csv from the per-seed files of a previous run. */
gb_status gb_report(const char* runs_dir, const char* out_csv);

/* Render a run's best trajectory (from gb_explore output or a per-seed
 * JSON file) to an SVG. */
gb_status gb_render_trace(const char* run_json, const char* config_path, const char* out_svg);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GOBLEND_H */
