#ifndef RESTARTKIT_H
#define RESTARTKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. Configuration and solver failures use the same numbers as
// the command-line exit codes.
typedef enum RkStatus {
  RK_STATUS_OK = 0,
  RK_STATUS_OTHER = 1,
  RK_STATUS_CONFIG = 2,
  RK_STATUS_SOLVER_FAILURE = 3,
  RK_STATUS_IO = 4,
  RK_STATUS_NULL_POINTER = 5,
  RK_STATUS_PANIC = 6,
} RkStatus;

// Schedule modes accepted by [`rk_schedule_new`].
typedef enum RkScheduleMode {
  RK_SCHEDULE_MODE_BOTH_UNKNOWN = 0,
  RK_SCHEDULE_MODE_ALPHA_KNOWN = 1,
  RK_SCHEDULE_MODE_BETA_KNOWN = 2,
  RK_SCHEDULE_MODE_BOTH_KNOWN = 3,
} RkScheduleMode;

// Opaque experiment configuration.
typedef struct RkConfig RkConfig;

// Opaque result of [`rk_run`].
typedef struct RkReport RkReport;

// Opaque schedule enumerator.
typedef struct RkSchedule RkSchedule;

// One trace row. Missing error columns are reported as NaN.
typedef struct RkTraceRow {
  uint64_t inner_iteration;
  uint64_t restart_index;
  int64_t grid_i;
  uint64_t grid_j;
  uint64_t grid_k;
  double objective_value;
  double objective_error;
  double feasibility_gap;
  double reconstruction_error;
} RkTraceRow;

// One grid triple `(i, j, k)` and its `h` value.
typedef struct RkGridPoint {
  int64_t i;
  uint64_t j;
  uint64_t k;
  double h;
} RkGridPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rk_version(void);

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *rk_last_error_message(void);

// Parses a JSON configuration.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum RkStatus rk_config_from_json(const char *json, struct RkConfig **out);

// Loads a JSON configuration file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum RkStatus rk_config_load(const char *path, struct RkConfig **out);

// # Safety
// `cfg` must come from this library or be null.
void rk_config_free(struct RkConfig *cfg);

// # Safety
// `cfg` must be a live configuration.
enum RkStatus rk_config_set_seed(struct RkConfig *cfg, uint64_t seed);

// Sets the inner-iteration budget `t`.
//
// # Safety
// `cfg` must be a live configuration.
enum RkStatus rk_config_set_budget(struct RkConfig *cfg, uint64_t budget);

// Sets where the trace CSV (and next to it the summary) is written.
//
// # Safety
// `cfg` must be a live configuration and `path` a NUL-terminated string.
enum RkStatus rk_config_set_output(struct RkConfig *cfg, const char *path);

// Runs the configured experiment with at most `threads` workers (0 means
// one). Writes the trace and summary files like the command-line tool.
//
// # Safety
// `cfg` must be a live configuration and `out` a valid pointer.
enum RkStatus rk_run(const struct RkConfig *cfg, uint32_t threads, struct RkReport **out);

// # Safety
// `report` must come from this library or be null.
void rk_report_free(struct RkReport *report);

// Total inner iterations, or 0 for a null report.
//
// # Safety
// `report` must be a live report or null.
uint64_t rk_report_inner_iterations(const struct RkReport *report);

// Number of solver calls, or 0 for a null report.
//
// # Safety
// `report` must be a live report or null.
uint64_t rk_report_restarts(const struct RkReport *report);

// Objective at the returned point, NaN for a null report.
//
// # Safety
// `report` must be a live report or null.
double rk_report_final_objective(const struct RkReport *report);

// Length of the returned point, 0 for a null report.
//
// # Safety
// `report` must be a live report or null.
size_t rk_report_dimension(const struct RkReport *report);

// Copies the returned point into `re` and `im` (either may be null), each
// holding `len` entries. `len` must equal [`rk_report_dimension`].
//
// # Safety
// `re` and `im` must be null or point to `len` writable doubles.
enum RkStatus rk_report_final_point(const struct RkReport *report,
                                    double *re,
                                    double *im,
                                    size_t len);

// Number of trace rows, 0 for a null report.
//
// # Safety
// `report` must be a live report or null.
size_t rk_report_trace_len(const struct RkReport *report);

// Copies trace row `index` into `out`.
//
// # Safety
// `report` must be a live report and `out` a valid pointer.
enum RkStatus rk_report_trace_row(const struct RkReport *report,
                                  size_t index,
                                  struct RkTraceRow *out);

// The run summary as a JSON string owned by the caller; release it with
// [`rk_string_free`]. Null on failure.
//
// # Safety
// `report` must be a live report or null.
char *rk_report_summary_json(const struct RkReport *report);

// # Safety
// `s` must come from this library or be null.
void rk_string_free(char *s);

// Creates an enumerator of the h-assignment for `mode` with exponents
// `c1`, `c2` (both above 1).
//
// # Safety
// `out` must be a valid pointer.
enum RkStatus rk_schedule_new(enum RkScheduleMode mode,
                              double c1,
                              double c2,
                              struct RkSchedule **out);

// Writes the next grid triple into `out`.
//
// # Safety
// `schedule` must be a live enumerator and `out` a valid pointer.
enum RkStatus rk_schedule_next(struct RkSchedule *schedule, struct RkGridPoint *out);

// Number of grid triples with `h ≤ tau`.
//
// # Safety
// `schedule` must be a live enumerator and `out` a valid pointer.
enum RkStatus rk_schedule_sublevel_count(const struct RkSchedule *schedule,
                                         double tau,
                                         uint64_t *out);

// # Safety
// `schedule` must come from this library or be null.
void rk_schedule_free(struct RkSchedule *schedule);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESTARTKIT_H */
