/* C interface to the harvester simulator.
 *
 * Every call returns an hs_status. On failure hs_last_error() holds a
 * one-line message for the calling thread until its next failing call.
 * Strings handed out through char** parameters are owned by the caller and
 * released with hs_string_free().
 */
#ifndef HARVESTSIM_H
#define HARVESTSIM_H

#include <stddef.h>

#if defined(_WIN32)
#define HS_API __declspec(dllexport)
#else
#define HS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hs_status {
  HS_OK = 0,
  HS_ERR_ARGUMENT = 1,    /* null pointer or malformed argument */
  HS_ERR_CONFIG = 2,      /* invalid or unreadable configuration */
  HS_ERR_DOMAIN = 3,      /* physically meaningless input */
  HS_ERR_NUMERIC = 4,     /* a solver failed to converge */
  HS_ERR_CALIBRATION = 5, /* anchors could not be met */
  HS_ERR_UNTUNABLE = 6,   /* no L-C pair reaches the match target */
  HS_ERR_INTERNAL = 7
} hs_status;

typedef enum hs_variant { HS_WITH_PUMP = 0, HS_NO_PUMP = 1 } hs_variant;

typedef struct hs_scenario hs_scenario;
typedef struct hs_sim_result hs_sim_result;

HS_API const char* hs_version(void);
HS_API const char* hs_last_error(void);
HS_API const char* hs_status_name(hs_status s);
HS_API void hs_string_free(char* s);

/* Scenarios */
HS_API hs_status hs_scenario_load(const char* path, hs_scenario** out);
HS_API hs_status hs_scenario_parse(const char* json, hs_scenario** out);
HS_API hs_status hs_scenario_preset(const char* name, hs_scenario** out);
/* Newline-separated preset names. */
HS_API hs_status hs_preset_names(char** out);
HS_API void hs_scenario_free(hs_scenario* s);
HS_API hs_status hs_scenario_clone(const hs_scenario* s, hs_scenario** out);
HS_API hs_status hs_scenario_to_json(const hs_scenario* s, char** out);
HS_API hs_status hs_scenario_save(const hs_scenario* s, const char* path);
/* 1 when both describe the same model, 0 otherwise. */
HS_API int hs_scenario_equal(const hs_scenario* a, const hs_scenario* b);

HS_API hs_status hs_scenario_set_variant(hs_scenario* s, hs_variant v);
HS_API hs_status hs_scenario_get_variant(const hs_scenario* s, hs_variant* out);
HS_API hs_status hs_scenario_set_distance(hs_scenario* s, double meters);
HS_API hs_status hs_scenario_set_duration(hs_scenario* s, double seconds);
/* axis: "distance" (m), "frequency" (Hz) or "tx_power" (W). */
HS_API hs_status hs_scenario_set_sweep(hs_scenario* s, const char* axis, double start, double stop, double step);
/* HS_ERR_CONFIG when the scenario carries no sweep. `axis` is a static string. */
HS_API hs_status hs_scenario_get_sweep(const hs_scenario* s, const char** axis, double* start, double* stop,
                                       double* step);

/* Simulation */
typedef struct hs_summary {
  double rate_hz;
  double received_dbm;
  double v_rect;
  double cycle_input_j;
  double cycle_load_j;
  double simulated_s;
  size_t releases;
  size_t logs;
  size_t brownouts;
  size_t events;
  int activated;
  int sustained;
} hs_summary;

HS_API hs_status hs_simulate(const hs_scenario* s, hs_sim_result** out);
HS_API hs_status hs_result_summary(const hs_sim_result* r, hs_summary* out);
HS_API hs_status hs_result_events_csv(const hs_sim_result* r, char** out);
HS_API void hs_sim_result_free(hs_sim_result* r);

/* Sweeps. jobs <= 0 uses every core. The sweep must be set on the scenario. */
HS_API hs_status hs_sweep_csv(const hs_scenario* s, int jobs, char** csv_out);

typedef struct hs_comparison {
  double threshold_pump_dbm;
  double threshold_ref_dbm;
  double sensitivity_gap_db;
  double range_pump_m;
  double range_ref_m;
  double range_ratio;
  double crossover; /* valid when has_crossover */
  double last_active_pump; /* valid when has_last_active_pump */
  double last_active_ref;
  double best_axis_pump; /* lowest activation EIRP along the axis */
  double best_axis_ref;
  int has_crossover;
  int has_last_active_pump;
  int has_last_active_ref;
  int has_best_axis;
} hs_comparison;

/* Runs both variants; rows alternate with_pump, no_pump per axis value. */
HS_API hs_status hs_compare_csv(const hs_scenario* s, int jobs, char** csv_out, hs_comparison* report);

/* Matching */
typedef struct hs_tune_result {
  double l_henries;
  double c_farads;
  double gamma_mag;
  double return_loss_db;
  const char* topology; /* static string */
} hs_tune_result;

/* On HS_ERR_UNTUNABLE `out` still holds the best pair found. */
HS_API hs_status hs_tune(double r_load, double x_load, double freq_hz, double z0, hs_tune_result* out);

/* Calibration. anchors_path may be NULL, in which case the built-in
 * anchors are used with `reading` ("points" or "relative", NULL = points).
 * On success the scenario is updated in place. The residual report is
 * written to report_out (may be NULL) on success and on
 * HS_ERR_CALIBRATION. */
HS_API hs_status hs_calibrate(hs_scenario* s, const char* anchors_path, const char* reading, char** report_out);
HS_API hs_status hs_reference_anchors_json(const char* reading, char** out);

/* Human-readable analysis of a scenario (thresholds, ranges, efficiency,
 * sizing, match). */
HS_API hs_status hs_report(const hs_scenario* s, char** out);

#ifdef __cplusplus
}
#endif

#endif /* HARVESTSIM_H */
