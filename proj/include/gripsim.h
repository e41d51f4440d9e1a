/* C API of the gripper simulation library.
 *
 * All functions return gripsim_status; 0 is success and nonzero codes match
 * the CLI exit-code contract. On failure gripsim_last_error() returns a
 * thread-local message describing what went wrong. Handles are opaque and
 * must be released with their _free function.
 */
#ifndef GRIPSIM_H
#define GRIPSIM_H

#include <stddef.h>

#if defined(_WIN32)
#define GRIPSIM_API __declspec(dllexport)
#else
#define GRIPSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gripsim_status {
  GRIPSIM_OK = 0,
  GRIPSIM_ERR_CONFIG = 1,     /* invalid input, malformed scenario */
  GRIPSIM_ERR_SOLVER = 2,     /* solver non-convergence */
  GRIPSIM_ERR_INFEASIBLE = 3  /* infeasible design / aborted cycle */
} gripsim_status;

typedef struct gripsim_scenario gripsim_scenario;

typedef struct gripsim_run_options {
  int strict;                 /* nonzero: validation failures become errors */
  int threads;                /* sweep fan-out; <= 1 runs serially */
  unsigned long long seed;    /* feeds solver multi-start jitter only */
} gripsim_run_options;

GRIPSIM_API const char* gripsim_version(void);

/* Thread-local message for the most recent failure in this thread. */
GRIPSIM_API const char* gripsim_last_error(void);

/* Scenario lifecycle. Parsed scenarios are immutable. */
GRIPSIM_API gripsim_status gripsim_scenario_load(const char* path, gripsim_scenario** out);
GRIPSIM_API gripsim_status gripsim_scenario_parse(const char* json_text, gripsim_scenario** out);
GRIPSIM_API void gripsim_scenario_free(gripsim_scenario* scenario);
GRIPSIM_API const char* gripsim_scenario_experiment(const gripsim_scenario* scenario);
GRIPSIM_API int gripsim_scenario_has_sweep(const gripsim_scenario* scenario);

/* Runs the scenario's experiment, writing CSV traces and a summary JSON into
 * out_dir. Outputs are byte-identical across runs on the same input.
 * options may be NULL for defaults. */
GRIPSIM_API gripsim_status gripsim_run(const gripsim_scenario* scenario, const char* out_dir,
                                       const gripsim_run_options* options);

/* Runs the declared parameter sweep: one summary row per grid point plus the
 * per-point outputs. */
GRIPSIM_API gripsim_status gripsim_sweep(const gripsim_scenario* scenario, const char* out_dir,
                                         const gripsim_run_options* options);

/* Direct computations (screw-drive statics and payload arithmetic). */
GRIPSIM_API gripsim_status gripsim_switching_threshold(double r_g1_mm, double theta_th_rad,
                                                       double tau_pre_max_nmm, double* out_newton);
GRIPSIM_API gripsim_status gripsim_required_preload_torque(double r_g1_mm, double theta_th_rad,
                                                           double f_ex_newton, double* out_nmm);
GRIPSIM_API gripsim_status gripsim_payload_estimate(int finger_count, double finger_strength_newton,
                                                    double* out_kg);

/* Energy-minimizing finger posture under insertion force f_tr. k_sp has n
 * entries [N·mm/rad]; theta_out and f_out receive n values each (either may
 * be NULL). */
GRIPSIM_API gripsim_status gripsim_solve_posture(int n, double l_l_mm, double d_l_mm,
                                                 const double* k_sp, double k_fs,
                                                 double f_tr_newton, double* theta_out,
                                                 double* f_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GRIPSIM_H */
