/* C interface for the ncsense estimation library. */

#ifndef NCSENSE_H
#define NCSENSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code returned by every fallible call.
 */
enum NcsenseStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  /**
   * Success.
   */
  NcsenseStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  NcsenseStatus_NullArgument = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  NcsenseStatus_Utf8 = 2,
  /**
   * Configuration is invalid or could not be parsed.
   */
  NcsenseStatus_Config = 3,
  /**
   * Occupancy mask construction or parsing failed.
   */
  NcsenseStatus_Mask = 4,
  /**
   * Operand dimensions do not line up.
   */
  NcsenseStatus_Shape = 5,
  /**
   * Nothing usable to estimate from.
   */
  NcsenseStatus_NoData = 6,
  /**
   * The solver could not run or produced non-finite values.
   */
  NcsenseStatus_Solver = 7,
  /**
   * Sparsity-weight selection failed.
   */
  NcsenseStatus_Tuning = 8,
  /**
   * An argument was out of range or unparseable.
   */
  NcsenseStatus_InvalidArgument = 9,
  /**
   * File system failure.
   */
  NcsenseStatus_Io = 10,
  /**
   * The library panicked internally; state is still consistent.
   */
  NcsenseStatus_Panic = 11,
};
#ifndef __cplusplus
typedef int32_t NcsenseStatus;
#endif // __cplusplus

/**
 * Opaque simulation configuration handle.
 */
typedef struct NcsenseConfig NcsenseConfig;

/**
 * Output of a single estimation run.
 *
 * Contents are meaningful only when the producing call returned
 * `NcsenseStatus_Ok`. Sparsity weights are NaN for methods that do not use
 * them.
 */
typedef struct NcsenseEstimate {
  /**
   * Estimated target range in meters.
   */
  double range_m;
  /**
   * Estimated radial velocity in meters per second.
   */
  double velocity_mps;
  /**
   * 1-based peak bin on the range axis.
   */
  uint64_t range_peak_bin;
  /**
   * 1-based peak bin on the velocity axis.
   */
  uint64_t velocity_peak_bin;
  /**
   * Peak-to-sidelobe ratio of the range spectrum in dB; +inf when the
   * spectrum is a clean impulse.
   */
  double range_psr_db;
  /**
   * Peak-to-sidelobe ratio of the velocity spectrum in dB.
   */
  double velocity_psr_db;
  /**
   * Sparsity weight applied on the range axis, NaN when not applicable.
   */
  double lambda_range;
  /**
   * Sparsity weight applied on the velocity axis, NaN when not applicable.
   */
  double lambda_velocity;
  /**
   * Total solver iterations across all per-column range solves.
   */
  uint64_t range_solver_iters;
  /**
   * Total solver iterations across all per-row velocity solves.
   */
  uint64_t velocity_solver_iters;
} NcsenseEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string. Never null.
 */
const char *ncsense_version(void);

/**
 * Message describing the most recent failure on the calling thread, as a
 * NUL-terminated string. Empty when the last call succeeded. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *ncsense_last_error_message(void);

/**
 * Allocates a configuration populated with the library defaults. Never
 * fails. Release with `ncsense_config_free`.
 */
struct NcsenseConfig *ncsense_config_default(void);

/**
 * Loads a configuration from a `key = value` text file. Returns null on
 * failure and records the reason for `ncsense_last_error_message`.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string pointer.
 */
struct NcsenseConfig *ncsense_config_load(const char *path);

/**
 * Sets one configuration field by its text key, e.g.
 * `ncsense_config_set(cfg, "n_subcarriers", "256")`. Unknown keys and
 * unparseable values are rejected without modifying the configuration.
 *
 * # Safety
 * `cfg` must come from a constructor of this library and not have been
 * freed; `key` and `value` must be valid NUL-terminated string pointers.
 */
NcsenseStatus ncsense_config_set(struct NcsenseConfig *cfg, const char *key, const char *value);

/**
 * Checks every configuration invariant. Returns `Ok` when the configuration
 * is usable; otherwise returns `Config` and stores the full list of
 * violations in the thread error message.
 *
 * # Safety
 * `cfg` must come from a constructor of this library and not have been
 * freed.
 */
NcsenseStatus ncsense_config_validate(const struct NcsenseConfig *cfg);

/**
 * Releases a configuration handle. Null is accepted and ignored.
 *
 * # Safety
 * `cfg` must be null or an unfreed pointer from a constructor of this
 * library; it must not be used afterwards.
 */
void ncsense_config_free(struct NcsenseConfig *cfg);

/**
 * Runs one end-to-end estimation and fills `out`.
 *
 * `scenario` is `"s1"`, `"s2"`, or `"file:PATH"` pointing at an occupancy
 * mask CSV. `method` is `"jcmsa"`, `"masked-2dfft"`, or `"plain-2dfft"`.
 * `lambda_source` is a non-negative number, `"table"`, or `"tune"`; it only
 * affects the sparse method. `seed` selects the noise realization.
 *
 * # Safety
 * `cfg` must come from a constructor of this library and not have been
 * freed; `scenario`, `method`, and `lambda_source` must be valid
 * NUL-terminated string pointers; `out` must point to writable memory for
 * one `NcsenseEstimate`.
 */
NcsenseStatus ncsense_estimate(const struct NcsenseConfig *cfg,
                               const char *scenario,
                               double snr_db,
                               const char *method,
                               const char *lambda_source,
                               uint64_t seed,
                               struct NcsenseEstimate *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* NCSENSE_H */
