#ifndef EPIREGION_H
#define EPIREGION_H

/* Generated by cbindgen from epiregion-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point. The validation and
 * numerical codes match the exit codes of the `epiregion` binary.
 */
typedef enum {
  EPI_STATUS_OK = 0,
  EPI_STATUS_VALIDATION = 2,
  EPI_STATUS_NUMERICAL = 3,
  EPI_STATUS_NULL_ARGUMENT = 4,
  EPI_STATUS_INVALID_UTF8 = 5,
  EPI_STATUS_PANIC = 6,
} EpiStatus;

/**
 * Opaque handle to a parsed and validated scenario.
 */
typedef struct EpiScenario EpiScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message of the current thread, or NULL when none was
 * recorded. Free with [`epi_string_free`].
 */
char *epi_last_error(void);

/**
 * Crate version as a static string; do not free.
 */
const char *epi_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by an `epi_*` function (or
 * NULL) and not yet freed.
 */
void epi_string_free(char *s);

/**
 * Parses and validates a scenario from a JSON string. On success stores a
 * handle in `out`; release it with [`epi_scenario_free`]. File references
 * inside the scenario resolve against the current working directory.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be a valid pointer.
 */
EpiStatus epi_scenario_parse(const char *json, EpiScenario **out);

/**
 * Releases a scenario handle.
 *
 * # Safety
 * `scenario` must come from [`epi_scenario_parse`] (or be NULL) and not yet
 * be freed.
 */
void epi_scenario_free(EpiScenario *scenario);

/**
 * Content digest (hex SHA-256 of the canonical serialized scenario).
 * Returns NULL on a NULL handle. Free with [`epi_string_free`].
 *
 * # Safety
 * `scenario` must be a live handle from [`epi_scenario_parse`].
 */
char *epi_scenario_digest(const EpiScenario *scenario);

/**
 * Runs a subcommand (`simulate`, `eigen`, `certify`, `optimize-region`,
 * `compare-eigen`) on a parsed scenario and stores its JSON summary in
 * `out_json`. `method`, `mode` and `domain_flag` accept the same values as
 * the command-line flags and may be NULL for the defaults.
 *
 * # Safety
 * `scenario` must be a live handle; string arguments must be
 * NUL-terminated or NULL where documented; `out_json` must be valid.
 */
EpiStatus epi_run(const EpiScenario *scenario,
                  const char *command,
                  const char *method,
                  const char *mode,
                  const char *domain_flag,
                  char **out_json);

/**
 * As [`epi_run`], but stores a JSON object mapping every produced artifact
 * file name to its contents (CSV files included).
 *
 * # Safety
 * Same contract as [`epi_run`].
 */
EpiStatus epi_run_artifacts(const EpiScenario *scenario,
                            const char *command,
                            const char *method,
                            const char *mode,
                            const char *domain_flag,
                            char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPIREGION_H */
