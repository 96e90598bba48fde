#ifndef ENLARGEMENT_H
#define ENLARGEMENT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. `ENL_CHECK_FAILED` is only returned by [`enl_scenario_run`]
 * when the run completed but some check did not pass.
 */
typedef enum EnlStatus {
  ENL_OK = 0,
  ENL_CHECK_FAILED = 1,
  ENL_ENGINE_ERROR = 2,
  ENL_NULL_ARGUMENT = 3,
  ENL_INVALID_UTF8 = 4,
  ENL_PARSE_ERROR = 5,
  ENL_PANIC = 6,
} EnlStatus;

/**
 * The report of a scenario run.
 */
typedef struct EnlReport EnlReport;

/**
 * A parsed and validated scenario.
 */
typedef struct EnlScenario EnlScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a scenario from TOML text.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EnlStatus enl_scenario_parse(const char *toml, struct EnlScenario **out);

/**
 * Loads a scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EnlStatus enl_scenario_load(const char *path, struct EnlScenario **out);

/**
 * Overrides the seed of every random component of the scenario.
 *
 * # Safety
 * `scenario` must be a handle from this library.
 */
enum EnlStatus enl_scenario_set_seed(struct EnlScenario *scenario, uint64_t seed);

/**
 * Overrides the Monte Carlo path count.
 *
 * # Safety
 * `scenario` must be a handle from this library.
 */
enum EnlStatus enl_scenario_set_paths(struct EnlScenario *scenario, size_t paths);

/**
 * Runs every check of the scenario. On `EnlOk` or `EnlCheckFailed` a report
 * is stored in `out`.
 *
 * # Safety
 * `scenario` must be a handle from this library and `out` a valid pointer.
 */
enum EnlStatus enl_scenario_run(const struct EnlScenario *scenario, struct EnlReport **out);

/**
 * 1 when every check passed, 0 when some failed, -1 for a null handle.
 *
 * # Safety
 * `report` must be null or a handle from this library.
 */
int enl_report_passed(const struct EnlReport *report);

/**
 * Number of checks in the report, 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a handle from this library.
 */
size_t enl_report_check_count(const struct EnlReport *report);

/**
 * The report as JSON; release with [`enl_string_free`]. Null for a null handle.
 *
 * # Safety
 * `report` must be null or a handle from this library.
 */
char *enl_report_json(const struct EnlReport *report);

/**
 * The report as a text summary; release with [`enl_string_free`].
 *
 * # Safety
 * `report` must be null or a handle from this library.
 */
char *enl_report_text(const struct EnlReport *report);

/**
 * # Safety
 * `scenario` must be null or a handle from this library, not yet freed.
 */
void enl_scenario_free(struct EnlScenario *scenario);

/**
 * # Safety
 * `report` must be null or a handle from this library, not yet freed.
 */
void enl_report_free(struct EnlReport *report);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void enl_string_free(char *s);

/**
 * Message of the last error on this thread, or null. Valid until the next
 * call into the library from the same thread.
 */
const char *enl_last_error(void);

/**
 * Library version as a static string.
 */
const char *enl_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENLARGEMENT_H */
