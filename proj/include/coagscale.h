#ifndef COAGSCALE_H
#define COAGSCALE_H

#include <stddef.h>

#if defined(_WIN32)
#define CS_API __declspec(dllexport)
#else
#define CS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cs_status {
    CS_OK = 0,
    CS_ERR_DOMAIN = 1,
    CS_ERR_NUMERICAL = 2,
    CS_ERR_RANGE = 3,
    CS_ERR_INTEGRITY = 4,
    CS_ERR_SEARCH = 5,
    CS_ERR_IO = 6,
    CS_ERR_NULL = 7,
    CS_ERR_INTERNAL = 8
} cs_status;

/* Message of the last failing call on this thread; empty after a success. */
CS_API const char* cs_last_error_message(void);
CS_API const char* cs_status_name(cs_status s);
CS_API const char* cs_version(void);

/* Frees strings returned by the library. */
CS_API void cs_string_free(char* s);

typedef struct cs_dispersion_info {
    double lambda;
    double h_lambda;
    double mu_re;
    double mu_im;
    double alpha;
    double beta;
    double k_interval_upper;
    double residual;
} cs_dispersion_info;

CS_API cs_status cs_dispersion(double lambda, cs_dispersion_info* out);

/* Regime oracles */
CS_API cs_status cs_regime_period(double energy, double* out);
CS_API cs_status cs_regime_phi(double energy, double* out);
CS_API cs_status cs_amplitude_map(double a_minus, double* a_plus);
CS_API cs_status cs_transition_length(double lambda, double a_minus, double a_plus, double* out);

/* Peak profiles */
typedef struct cs_peak cs_peak;

CS_API cs_status cs_peak_create(double a, double kappa, cs_peak** out);
CS_API void cs_peak_destroy(cs_peak* p);
CS_API cs_status cs_peak_eval(const cs_peak* p, double x_log, double* v, double* h, double* u);
CS_API cs_status cs_peak_convolution_residual(const cs_peak* p, double x, double* out);

/* Adiabatic cycle */
typedef struct cs_cycle_profile {
    double omega0;
    double energy;
    double xi[4];
    double sigma[4];
    double phi;
    double margin;
    int sandwich_ok;
} cs_cycle_profile;

CS_API cs_status cs_adiabatic_profile(double omega0, cs_cycle_profile* out);

/* Trajectories on a uniform log grid */
typedef struct cs_trajectory cs_trajectory;

typedef struct cs_node {
    double x_log;
    double h;
    double u;
    double v;
} cs_node;

CS_API cs_status cs_trajectory_constant(double lambda, double x_start, double step, size_t count, double value,
                                        cs_trajectory** out);
CS_API cs_status cs_trajectory_read(const char* csv_path, const char* sidecar_path, cs_trajectory** out);
CS_API void cs_trajectory_destroy(cs_trajectory* t);
CS_API cs_status cs_trajectory_size(const cs_trajectory* t, size_t* out);
CS_API cs_status cs_trajectory_node(const cs_trajectory* t, size_t i, cs_node* out);
CS_API cs_status cs_trajectory_eval_I(const cs_trajectory* t, double x_log, double* out);
CS_API cs_status cs_trajectory_max_residual(const cs_trajectory* t, size_t stride, double* out);
CS_API cs_status cs_trajectory_write_csv(const cs_trajectory* t, const char* path);
CS_API cs_status cs_trajectory_write_sidecar(const cs_trajectory* t, const char* path);

/* Shooting for the tail amplitude */
typedef enum cs_classification {
    CS_OVERSHOOT = 0,
    CS_UNDERSHOOT = 1,
    CS_CONVERGED = 2,
    CS_BUDGET = 3
} cs_classification;

typedef struct cs_shoot_options {
    double x_start;
    double step;
    double x_max;
    double delta;
    double tolerance;
    int scan_points;
    unsigned threads; /* 0 = COAGSCALE_THREADS or hardware */
} cs_shoot_options;

typedef struct cs_shot_summary {
    double lambda;
    double k_star;
    double bracket_lo;
    double bracket_hi;
    int target_cycles;
    int bisection_steps;
    cs_classification classification;
    double terminal_x;
    size_t cycle_count;
} cs_shot_summary;

typedef struct cs_cycle {
    int n;
    double a;
    double x_plus;
    double x_zero;
    double x_minus;
} cs_cycle;

typedef struct cs_shot cs_shot;

CS_API cs_status cs_shoot_options_default(double lambda, cs_shoot_options* out);
CS_API cs_status cs_shoot(double lambda, const cs_shoot_options* opt, cs_shot** out);
CS_API void cs_shot_destroy(cs_shot* s);
CS_API cs_status cs_shot_summary_get(const cs_shot* s, cs_shot_summary* out);
CS_API cs_status cs_shot_cycle(const cs_shot* s, size_t i, cs_cycle* out);
/* The returned trajectory is an independent copy owned by the caller. */
CS_API cs_status cs_shot_trajectory(const cs_shot* s, cs_trajectory** out);
CS_API const char* cs_classification_name(cs_classification c);

/* Matched asymptotic recursion */
typedef struct cs_matching cs_matching;

typedef struct cs_match_record {
    int n;
    double a;
    double x_plus;
    double x_zero;
    double x_minus;
    double energy;
} cs_match_record;

typedef enum cs_regime { CS_RAMP = 0, CS_PEAK = 1, CS_DECAY = 2, CS_VALLEY = 3 } cs_regime;

CS_API cs_status cs_match_run(double lambda, double a1, double x1_plus, int max_cycles, cs_matching** out);
CS_API void cs_match_destroy(cs_matching* m);
CS_API cs_status cs_match_count(const cs_matching* m, size_t* out);
CS_API cs_status cs_match_record_get(const cs_matching* m, size_t i, cs_match_record* out);
CS_API cs_status cs_match_terminated(const cs_matching* m, int* out);
CS_API cs_status cs_match_range(const cs_matching* m, double* x_lo, double* x_hi);
CS_API cs_status cs_match_composite(const cs_matching* m, double x_log, double* h, cs_regime* regime, int* cycle);
CS_API const char* cs_regime_name(cs_regime r);

/* Validation report. criteria == NULL or count == 0 runs everything. */
CS_API cs_status cs_report_json(double lambda, const int* criteria, size_t count, char** json, int* all_pass);

#ifdef __cplusplus
}
#endif

#endif
