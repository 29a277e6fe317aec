/* C interface to the torus dispersive-control core.
 *
 * All compound inputs and outputs travel as JSON strings; states and
 * programs also exist as opaque handles for repeated use. Every function
 * returns a kdv_status; on failure kdv_last_error() describes the problem.
 * Strings returned through char** must be released with kdv_string_free().
 */
#ifndef KDVSCH_KDVSCH_H
#define KDVSCH_KDVSCH_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kdv_status {
    KDV_OK = 0,
    KDV_EINVAL = 1,   /* bad argument or malformed input */
    KDV_ETRUNC = 2,   /* spectral truncation exceeded tolerance */
    KDV_ENOTSPAN = 3, /* phase target outside the control span */
    KDV_EBUDGET = 4,  /* calibration or recursion budget exhausted */
    KDV_ENOTPOS = 5,  /* field not positive where required */
    KDV_ECOST = 6,    /* dense oracle cost guard */
    KDV_EFAIL = 7     /* other failure */
} kdv_status;

typedef struct kdv_state kdv_state;
typedef struct kdv_program kdv_program;

/* Last error message for the calling thread; empty string if none. */
const char* kdv_last_error(void);
void kdv_string_free(char* s);

/* ---- states ---- */
kdv_status kdv_state_zero(int K, double alpha, kdv_state** out);
kdv_status kdv_state_constant(int K, double alpha, kdv_state** out);
kdv_status kdv_state_mode(int K, double alpha, int k, kdv_state** out);
kdv_status kdv_state_from_json(const char* json, kdv_state** out);
kdv_status kdv_state_to_json(const kdv_state* s, char** out);
kdv_status kdv_state_l2(const kdv_state* s, double* out);
kdv_status kdv_state_distance(const kdv_state* a, const kdv_state* b, double* out);
void kdv_state_free(kdv_state* s);

/* ---- programs ---- */
kdv_status kdv_program_from_json(const char* json, kdv_program** out);
kdv_status kdv_program_to_json(const kdv_program* p, char** out);
kdv_status kdv_program_total_time(const kdv_program* p, double* out);
void kdv_program_free(kdv_program* p);

/* ---- everything else: one JSON request/response entry point ----
 *
 * request: {"op": <name>, ...op-specific fields}. Supported ops:
 *   "simulate"        program + state -> final state + trace
 *   "synth_phase"     phase target -> program + achieved error
 *   "synth_transport" signed cone element -> program
 *   "steer"           word + state -> program + final state + error
 *   "saturate"        closure/certificate report
 *   "study"           named convergence study, field "name"
 * The response carries op-specific fields; see the CLI for usage.
 */
kdv_status kdv_run(const char* request_json, char** response_json);

#ifdef __cplusplus
}
#endif

#endif
