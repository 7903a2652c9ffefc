/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef TALBOT_H
#define TALBOT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TalbotStatus {
  TALBOT_STATUS_OK = 0,
  TALBOT_STATUS_NULL_POINTER = 1,
  TALBOT_STATUS_INVALID_UTF8 = 2,
  TALBOT_STATUS_DOMAIN = 3,
  TALBOT_STATUS_SYNTAX = 4,
  TALBOT_STATUS_CONFIG = 5,
  TALBOT_STATUS_UNKNOWN_MOLECULE = 6,
  TALBOT_STATUS_MISSING_POLARIZABILITY = 7,
  TALBOT_STATUS_TRUNCATION = 8,
  TALBOT_STATUS_CONVERGENCE = 9,
  TALBOT_STATUS_FIT = 10,
  TALBOT_STATUS_IO = 11,
  TALBOT_STATUS_FORMAT = 12,
  TALBOT_STATUS_PANIC = 13,
} TalbotStatus;

typedef enum TalbotVisibilityMode {
  TALBOT_VISIBILITY_MODE_SINUSOIDAL = 0,
  TALBOT_VISIBILITY_MODE_MIN_MAX = 1,
} TalbotVisibilityMode;

/**
 * A validated run configuration.
 */
typedef struct TalbotConfig TalbotConfig;

/**
 * Fourier components of a detected fringe signal.
 */
typedef struct TalbotHarmonics TalbotHarmonics;

/**
 * Result of a sinusoidal fit; see `talbot_fit_counts`.
 */
typedef struct TalbotFit {
  double offset;
  double amplitude;
  double phase;
  double visibility;
  double sigma_visibility;
  double reduced_chi_square;
} TalbotFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *talbot_version(void);

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *talbot_last_error(void);

/**
 * Parses configuration text into a new handle.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be writable.
 */
enum TalbotStatus talbot_config_parse(const char *text, struct TalbotConfig **out);

/**
 * Applies one `section.key=value` override in place. The handle is left
 * unchanged on failure.
 *
 * # Safety
 * `config` must come from `talbot_config_parse`; `assignment` must be
 * NUL-terminated.
 */
enum TalbotStatus talbot_config_set(struct TalbotConfig *config, const char *assignment);

/**
 * # Safety
 * `config` must come from `talbot_config_parse` or be NULL.
 */
void talbot_config_free(struct TalbotConfig *config);

/**
 * Imprinted phase at `speed` for the configured molecule and laser.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum TalbotStatus talbot_phi_max(const struct TalbotConfig *config, double speed, double *out);

/**
 * Mean number of absorbed photons at `speed`.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum TalbotStatus talbot_mean_absorbed_photons(const struct TalbotConfig *config,
                                               double speed,
                                               double *out);

/**
 * Closed-form standing-wave visibility at `zeta = L/L_T`.
 *
 * # Safety
 * `out` must be writable.
 */
enum TalbotStatus talbot_visibility_closed_form(double phi_max,
                                                double n0,
                                                double zeta,
                                                double open_fraction,
                                                double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum TalbotStatus talbot_mismatch_factor(double delta_period,
                                         double illuminated_width,
                                         double period,
                                         double *out);

/**
 * Velocity-averaged harmonics of the configured arrangement.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum TalbotStatus talbot_averaged_harmonics(const struct TalbotConfig *config,
                                            struct TalbotHarmonics **out);

/**
 * Highest harmonic order held.
 *
 * # Safety
 * `harmonics` must be a live handle; `out` must be writable.
 */
enum TalbotStatus talbot_harmonics_s_max(const struct TalbotHarmonics *harmonics, size_t *out);

/**
 * Component `S_s`; zero above the highest order.
 *
 * # Safety
 * `harmonics` must be a live handle; `re` and `im` must be writable.
 */
enum TalbotStatus talbot_harmonics_component(const struct TalbotHarmonics *harmonics,
                                             size_t s,
                                             double *re,
                                             double *im);

/**
 * # Safety
 * `harmonics` must be a live handle; `out` must be writable.
 */
enum TalbotStatus talbot_harmonics_visibility(const struct TalbotHarmonics *harmonics,
                                              enum TalbotVisibilityMode mode,
                                              double *out);

/**
 * # Safety
 * `harmonics` must come from `talbot_averaged_harmonics` or be NULL.
 */
void talbot_harmonics_free(struct TalbotHarmonics *harmonics);

/**
 * Weighted sinusoidal fit of `n` counts taken at `positions_nm`.
 *
 * # Safety
 * `positions_nm` and `counts` must each point to `n` doubles; `out` must be
 * writable.
 */
enum TalbotStatus talbot_fit_counts(const double *positions_nm,
                                    const double *counts,
                                    size_t n,
                                    double dwell_time,
                                    double dark_rate,
                                    double period_nm,
                                    struct TalbotFit *out);

/**
 * Runs the configured sweep and returns its CSV text, to be released with
 * `talbot_string_free`.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum TalbotStatus talbot_sweep_csv(const struct TalbotConfig *config, char **out);

/**
 * # Safety
 * `s` must come from this library or be NULL.
 */
void talbot_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TALBOT_H */
