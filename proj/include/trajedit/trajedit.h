#ifndef TRAJEDIT_TRAJEDIT_H
#define TRAJEDIT_TRAJEDIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(TRAJEDIT_BUILDING_LIBRARY)
#define TE_API __attribute__((visibility("default")))
#else
#define TE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum te_status {
  TE_OK = 0,
  TE_ERR_INVALID_ARGUMENT = 1,
  TE_ERR_PARSE = 2,
  TE_ERR_VALIDATION = 3,
  TE_ERR_PLANNING = 4,
  TE_ERR_SEARCH = 5,
  TE_ERR_RANGE = 6,
  TE_ERR_NOT_FOUND = 7,
  TE_ERR_REFUSED = 8,
  TE_ERR_IO = 9,
  TE_ERR_INTERNAL = 10
} te_status;

typedef struct te_scene te_scene;
typedef struct te_world te_world;

/* Message for the last failing call on this thread; never NULL. */
TE_API const char* te_last_error(void);
TE_API const char* te_status_name(te_status status);
TE_API const char* te_version(void);
TE_API void te_string_free(char* s);

/* Scenes */
TE_API te_status te_scene_load(const char* path, te_scene** out);
TE_API te_status te_scene_parse(const char* json_text, te_scene** out);
TE_API void te_scene_free(te_scene* scene);
TE_API te_status te_scene_lane_count(const te_scene* scene, size_t* out);
TE_API te_status te_scene_topo_path_count(const te_scene* scene, size_t* out);

/* Worlds. seed_params != 0 samples per-vehicle headway and reaction time
   from `seed`. */
TE_API te_status te_world_create(const te_scene* scene, double dt, int seed_params, uint64_t seed, te_world** out);
TE_API te_status te_world_clone(const te_world* world, te_world** out);
TE_API void te_world_free(te_world* world);
TE_API te_status te_world_step(te_world* world, long frames);
TE_API te_status te_world_time(const te_world* world, double* seconds, long* frame);

typedef struct te_vehicle_state {
  int id;
  int path_id;
  double x, y;
  double s, d;
  double vs, vd;
  double theta;
} te_vehicle_state;

TE_API te_status te_world_vehicle_count(const te_world* world, size_t* out);
/* Copies up to `capacity` active vehicles (ascending id); `count` receives
   the total. */
TE_API te_status te_world_vehicles(const te_world* world, te_vehicle_state* out, size_t capacity, size_t* count);
TE_API te_status te_world_spawn(te_world* world, int id, int path_id, double s, double d, double speed,
                                double desired_speed);

/* Plans a way-point path (xy holds n_points pairs) and registers it. A
   non-negative `vehicle` is rerouted onto it. */
TE_API te_status te_world_plan_path(te_world* world, const double* xy, size_t n_points, int vehicle, int* path_id);

typedef struct te_keyframe {
  int vehicle;
  double time;     /* absolute simulation time, s */
  int has_point;   /* nonzero: use x, y; else use s */
  double x, y;
  double s;
  int has_speed;
  double speed;
} te_keyframe;

typedef struct te_edit_options {
  double lattice_dt;   /* 0: 0.5 s */
  int iterations;      /* 0: 100 */
  double v_max;        /* 0: 20 m/s */
  int per_frame_regularizer;
  int average_speed_init;
} te_edit_options;

typedef struct te_edit_report {
  int met;
  int replanned;
  int iterations;
  int best_iteration;
  double best_loss;
  double max_error;         /* over the keyframes, m */
  double closest_distance;  /* closest approach to the last keyframe, m */
  double search_seconds;
  double optimize_seconds;
  size_t expansions;
} te_edit_report;

/* Optimizes one vehicle towards its keyframes and installs the result in
   the world. `options` may be NULL. */
TE_API te_status te_world_edit(te_world* world, const te_keyframe* keyframes, size_t n_keyframes,
                               const te_edit_options* options, te_edit_report* report);

/* Batch entry points. */
typedef struct te_run_overrides {
  const char* scenario; /* NULL: from config */
  const char* output;   /* NULL: from config */
  int has_seed;
  uint64_t seed;
  double dt;            /* 0: from config */
  double lattice_dt;    /* 0: from config */
  int iterations;       /* 0: from config */
} te_run_overrides;

/* Runs a config file. apply_edits == 0 writes the original trajectories
   only. `all_met` (nullable) receives whether every keyframe was met. */
TE_API te_status te_run(const char* config_path, int apply_edits, const te_run_overrides* overrides, int* all_met);

typedef struct te_bench_options {
  const double* lattice_steps; size_t n_lattice_steps; /* NULL: 0.5, 0.25 */
  const double* sim_steps; size_t n_sim_steps;         /* NULL: 0.5 ... 0.005 */
  int iterations;                                      /* 0: 100 */
  int repeats;                                         /* 0: 3 */
  int allow_fine_lattice;
} te_bench_options;

/* JSON report in `json_out` and a text table in `table_out` (both
   nullable, free with te_string_free). */
TE_API te_status te_bench(const te_bench_options* options, char** json_out, char** table_out);

/* Plans a way-point path on a scenario and writes it as "x,y,s" rows. */
TE_API te_status te_plan(const char* scenario_path, const double* xy, size_t n_points, const char* out_csv,
                         double* length);

#ifdef __cplusplus
}
#endif

#endif
