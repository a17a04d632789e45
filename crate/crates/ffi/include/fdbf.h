#ifndef FDBF_H
#define FDBF_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; nonzero values match the CLI exit codes where both exist.
 */
typedef enum FdbfStatus {
  FDBF_STATUS_OK = 0,
  FDBF_STATUS_NUMERIC = 2,
  FDBF_STATUS_DIMENSION = 3,
  FDBF_STATUS_ARGUMENT = 4,
  FDBF_STATUS_CONFIG = 5,
  FDBF_STATUS_IO = 6,
  FDBF_STATUS_FORMAT = 7,
  FDBF_STATUS_NULL_POINTER = 8,
  FDBF_STATUS_INVALID_UTF8 = 9,
  FDBF_STATUS_OUT_OF_RANGE = 10,
  FDBF_STATUS_PANIC = 11,
} FdbfStatus;

/**
 * Receiver architecture for the power model.
 */
typedef enum FdbfArchitecture {
  FDBF_ARCHITECTURE_FULL_DIGITAL = 0,
  FDBF_ARCHITECTURE_HYBRID = 1,
} FdbfArchitecture;

/**
 * Opaque scenario configuration.
 */
typedef struct FdbfConfig FdbfConfig;

/**
 * Opaque sweep result.
 */
typedef struct FdbfResult FdbfResult;

/**
 * Aggregates of one (axis value, variant, design) row.
 */
typedef struct FdbfRowSummary {
  double axis_value;
  double se_up_mean;
  double se_down_mean;
  double se_sum_mean;
  double se_up_p10;
  double se_down_p10;
  double ee_bits_per_joule_hz;
  /**
   * NaN when the design has no residual SI (upper bound).
   */
  double resid_si_db_mean;
  uint64_t trials;
  uint64_t failures;
} FdbfRowSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread; empty after a success.
 * The pointer stays valid until the next library call on the same thread.
 */
const char *fdbf_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fdbf_version(void);

/**
 * Parses a flat TOML scenario. `toml_text` may be NULL for an empty document;
 * `preset` may be NULL to use the one named in the text (default mmwave).
 *
 * # Safety
 * Non-NULL string arguments must be valid NUL-terminated strings and `out`
 * must be a valid pointer.
 */
enum FdbfStatus fdbf_config_parse(const char *toml_text,
                                  const char *preset,
                                  struct FdbfConfig **out);

/**
 * # Safety
 * `cfg` must be NULL or a handle from [`fdbf_config_parse`] not yet freed.
 */
void fdbf_config_free(struct FdbfConfig *cfg);

/**
 * # Safety
 * `cfg` must be a live configuration handle.
 */
enum FdbfStatus fdbf_config_set_seed(struct FdbfConfig *cfg, uint64_t seed);

/**
 * # Safety
 * `cfg` must be a live configuration handle.
 */
enum FdbfStatus fdbf_config_set_trials(struct FdbfConfig *cfg, uint64_t trials);

/**
 * Resolved configuration as TOML; release with [`fdbf_string_free`].
 *
 * # Safety
 * `cfg` must be a live configuration handle and `out` a valid pointer.
 */
enum FdbfStatus fdbf_config_to_toml(const struct FdbfConfig *cfg, char **out);

/**
 * Runs the full sweep described by `cfg`.
 *
 * # Safety
 * `cfg` must be a live configuration handle and `out` a valid pointer.
 */
enum FdbfStatus fdbf_run(const struct FdbfConfig *cfg, struct FdbfResult **out);

/**
 * # Safety
 * `res` must be NULL or a handle from [`fdbf_run`] not yet freed.
 */
void fdbf_result_free(struct FdbfResult *res);

/**
 * Number of rows, or 0 for a NULL handle.
 *
 * # Safety
 * `res` must be NULL or a live result handle.
 */
uint64_t fdbf_result_row_count(const struct FdbfResult *res);

/**
 * # Safety
 * `res` must be a live result handle and `out` a valid pointer.
 */
enum FdbfStatus fdbf_result_row(const struct FdbfResult *res,
                                uint64_t index,
                                struct FdbfRowSummary *out);

/**
 * Design label of a row, e.g. `hybrid:50`; release with [`fdbf_string_free`].
 *
 * # Safety
 * `res` must be a live result handle and `out` a valid pointer.
 */
enum FdbfStatus fdbf_result_row_design(const struct FdbfResult *res, uint64_t index, char **out);

/**
 * CSV rendering identical to the CLI output; release with [`fdbf_string_free`].
 *
 * # Safety
 * `res` must be a live result handle and `out` a valid pointer.
 */
enum FdbfStatus fdbf_result_to_csv(const struct FdbfResult *res, char **out);

/**
 * JSON rendering; `full` keeps per-trial records. Release with [`fdbf_string_free`].
 *
 * # Safety
 * `res` must be a live result handle and `out` a valid pointer.
 */
enum FdbfStatus fdbf_result_to_json(const struct FdbfResult *res, bool full, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void fdbf_string_free(char *s);

/**
 * Receive-side power in mW with the default device powers and the given ADC power.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FdbfStatus fdbf_total_power_mw(enum FdbfArchitecture architecture,
                                    uint32_t n_rx,
                                    uint32_t n_rf,
                                    double p_adc_mw,
                                    double *out);

/**
 * Energy efficiency in bits/s/Hz/W for spectral efficiency `se`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FdbfStatus fdbf_energy_efficiency(double se,
                                       enum FdbfArchitecture architecture,
                                       uint32_t n_rx,
                                       uint32_t n_rf,
                                       double p_adc_mw,
                                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FDBF_H */
