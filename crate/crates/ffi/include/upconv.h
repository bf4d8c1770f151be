#ifndef UPCONV_H
#define UPCONV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UpconvStatus {
  UPCONV_STATUS_OK = 0,
  UPCONV_STATUS_NULL_POINTER = 1,
  UPCONV_STATUS_INVALID_ARGUMENT = 2,
  UPCONV_STATUS_RANGE_VIOLATION = 3,
  UPCONV_STATUS_TONE_NOT_FOUND = 4,
  UPCONV_STATUS_NO_PASSBAND = 5,
  UPCONV_STATUS_PARSE = 6,
  UPCONV_STATUS_SYNTHESIS = 7,
  UPCONV_STATUS_PLANNING = 8,
  UPCONV_STATUS_INVALID_CHAIN = 9,
  UPCONV_STATUS_CONFIG = 10,
  UPCONV_STATUS_IO = 11,
  /**
   * A bug inside the library; the call had no effect.
   */
  UPCONV_STATUS_PANIC = 12,
} UpconvStatus;

typedef enum UpconvSideband {
  UPCONV_SIDEBAND_LOWER = 0,
  UPCONV_SIDEBAND_UPPER = 1,
} UpconvSideband;

/**
 * Opaque chain configuration handle.
 */
typedef struct UpconvChain UpconvChain;

/**
 * Opaque spectrum handle.
 */
typedef struct UpconvSpectrum UpconvSpectrum;

typedef struct UpconvPlan {
  double f_if_hz;
  double f_lo1_hz;
  double f_lo2_hz;
  double stage1_hz;
  double output_hz;
} UpconvPlan;

/**
 * Closed frequency ranges are `[low, high]` pairs in hertz.
 */
typedef struct UpconvPlanConstraints {
  double if_range_hz[2];
  double stage1_passband_hz[2];
  double stage2_passband_hz[2];
  double mixer1_lo_range_hz[2];
  double mixer2_lo_range_hz[2];
  enum UpconvSideband stage1_sideband;
  enum UpconvSideband stage2_sideband;
} UpconvPlanConstraints;

typedef struct UpconvPassbandMetrics {
  double f_low_hz;
  double f_high_hz;
  double mean_il_db;
  double min_il_db;
} UpconvPassbandMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or NULL. The pointer
 * stays valid until the next failing call on this thread.
 */
const char *upconv_last_error(void);

/**
 * Empty spectrum; tones closer than `merge_tolerance_hz` are merged.
 * Returns NULL for a negative or non-finite tolerance.
 */
struct UpconvSpectrum *upconv_spectrum_new(double merge_tolerance_hz);

/**
 * # Safety
 * `spectrum` must be NULL or a handle from this library not yet freed.
 */
void upconv_spectrum_free(struct UpconvSpectrum *spectrum);

/**
 * Adds a tone, summing power with any tone within the merge tolerance.
 * `label` may be NULL.
 *
 * # Safety
 * `spectrum` must be a live handle; `label` NULL or a NUL-terminated string.
 */
enum UpconvStatus upconv_spectrum_add_tone(struct UpconvSpectrum *spectrum,
                                           double frequency_hz,
                                           double power_dbm,
                                           const char *label);

/**
 * Number of tones; 0 for NULL.
 *
 * # Safety
 * `spectrum` must be NULL or a live handle.
 */
size_t upconv_spectrum_len(const struct UpconvSpectrum *spectrum);

/**
 * Tone `index` in ascending frequency order.
 *
 * # Safety
 * `spectrum` must be a live handle; the out pointers must be writable.
 */
enum UpconvStatus upconv_spectrum_get_tone(const struct UpconvSpectrum *spectrum,
                                           size_t index,
                                           double *frequency_hz,
                                           double *power_dbm);

/**
 * Power of the tone within the merge tolerance of `frequency_hz`.
 *
 * # Safety
 * `spectrum` must be a live handle; `power_dbm` writable.
 */
enum UpconvStatus upconv_spectrum_power_at(const struct UpconvSpectrum *spectrum,
                                           double frequency_hz,
                                           double *power_dbm);

/**
 * Power of `reference_hz` relative to `desired_hz`, in dBc.
 *
 * # Safety
 * `spectrum` must be a live handle; `dbc` writable.
 */
enum UpconvStatus upconv_dbc(const struct UpconvSpectrum *spectrum,
                             double desired_hz,
                             double reference_hz,
                             double *dbc);

/**
 * Desired tone minus the strongest other tone in `[band_low_hz,
 * band_high_hz]`; `INFINITY` when there is none.
 *
 * # Safety
 * `spectrum` must be a live handle; `sfdr_db` writable.
 */
enum UpconvStatus upconv_sfdr(const struct UpconvSpectrum *spectrum,
                              double desired_hz,
                              double band_low_hz,
                              double band_high_hz,
                              double *sfdr_db);

/**
 * Parses a chain config (the CLI's JSON format). Relative Touchstone
 * paths resolve against the working directory.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `chain` writable.
 */
enum UpconvStatus upconv_chain_from_json(const char *json, struct UpconvChain **chain);

/**
 * # Safety
 * `chain` must be NULL or a live handle.
 */
void upconv_chain_free(struct UpconvChain *chain);

/**
 * Re-plans LO2 for `target_hz` (LO1 and IF fixed) and stores the result
 * in the chain.
 *
 * # Safety
 * `chain` must be a live handle; `plan` NULL or writable.
 */
enum UpconvStatus upconv_chain_retarget(struct UpconvChain *chain,
                                        double target_hz,
                                        struct UpconvPlan *plan);

/**
 * Propagates the configured IF tone; `output` receives a new spectrum
 * handle for the chain output, owned by the caller.
 *
 * # Safety
 * `chain` must be a live handle; `output` writable.
 */
enum UpconvStatus upconv_chain_propagate(const struct UpconvChain *chain,
                                         struct UpconvSpectrum **output);

/**
 * Both LOs for `target_hz`.
 *
 * # Safety
 * `constraints` must be readable and `plan` writable.
 */
enum UpconvStatus upconv_plan(double target_hz,
                              const struct UpconvPlanConstraints *constraints,
                              struct UpconvPlan *plan_out);

/**
 * Microstrip characteristic impedance and effective permittivity.
 *
 * # Safety
 * `z0_ohm` and `eps_eff` must be writable.
 */
enum UpconvStatus upconv_line_parameters(double width_m,
                                         double eps_r,
                                         double height_m,
                                         double *z0_ohm,
                                         double *eps_eff);

/**
 * Image rejection in dB of an IQ mixer with the given imbalance;
 * `INFINITY` for a perfectly balanced one.
 */
double upconv_iq_image_rejection(double amplitude_imbalance_db, double phase_error_deg);

/**
 * Passband edges and insertion loss of the S21 in Touchstone text.
 *
 * # Safety
 * `touchstone` must be a NUL-terminated string; `metrics` writable.
 */
enum UpconvStatus upconv_touchstone_metrics(const char *touchstone,
                                            double edge_drop_db,
                                            struct UpconvPassbandMetrics *metrics);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UPCONV_H */
