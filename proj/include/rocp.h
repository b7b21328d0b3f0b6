/* SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the experiment driver: validated JSON configs behind an
 * opaque handle, spectrum and solve runs producing CSV tables, and dense
 * operator export. Every call returns a status code; on failure a
 * thread-local message is retrievable via rocp_last_error(). Handles are not
 * thread-safe; use one per thread.
 */

#ifndef ROCP_H
#define ROCP_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rocp_status {
  ROCP_OK = 0,
  ROCP_ERROR = 1,          /* internal failure; see rocp_last_error() */
  ROCP_INVALID_CONFIG = 2, /* config or size-cap rejection */
  ROCP_NOT_CONVERGED = 3   /* a solve run has a non-converged row */
} rocp_status;

/* An experiment: a validated config plus the result of its last run. */
typedef struct rocp_experiment rocp_experiment;

/* Version string of the library, static storage. */
const char* rocp_version(void);

/* Message describing the last failure on this thread; empty if none. */
const char* rocp_last_error(void);

/* Parses and validates a JSON config text; on success stores a fresh handle
 * in *out. The handle must be released with rocp_experiment_destroy. */
rocp_status rocp_experiment_create(const char* config_json, rocp_experiment** out);

/* As rocp_experiment_create, reading the text from a file. */
rocp_status rocp_experiment_create_from_file(const char* path, rocp_experiment** out);

void rocp_experiment_destroy(rocp_experiment* exp);

/* Number of sweep points the config expands to. */
rocp_status rocp_experiment_points(const rocp_experiment* exp, size_t* out);

/* The config's output path, or an empty string if it has none. Owned by the
 * handle; NULL only for a NULL handle. */
const char* rocp_experiment_output_path(const rocp_experiment* exp);

/* Extreme-eigenvalue study of the configured preconditioned operator, one
 * CSV row per sweep point. */
rocp_status rocp_experiment_run_spectrum(rocp_experiment* exp);

/* Preconditioned MINRES study, one CSV row per sweep point. Returns
 * ROCP_NOT_CONVERGED if any row failed to converge; the CSV still holds
 * every row. */
rocp_status rocp_experiment_run_solve(rocp_experiment* exp);

/* CSV text of the last run. Owned by the handle, valid until the next run
 * or destroy; NULL before the first run. */
const char* rocp_experiment_csv(const rocp_experiment* exp);

/* Number of data rows in the last run; 0 before any run. */
size_t rocp_experiment_rows(const rocp_experiment* exp);

/* Writes the last run's CSV (plus residual-history sidecars for solve runs)
 * to the config's output path; no-op if the config has none. */
rocp_status rocp_experiment_write_outputs(const rocp_experiment* exp);

/* Dense Matrix Market export of the saddle operator and the Schur
 * complement (L2 control) or reduced operator (H1 control) of a sweep-free
 * config. Files are named <prefix>_saddle.mtx etc.; every exported operator
 * must have dimension <= cap. */
rocp_status rocp_experiment_export_matrices(const rocp_experiment* exp, int cap,
                                            const char* prefix);

#ifdef __cplusplus
}
#endif

#endif /* ROCP_H */
