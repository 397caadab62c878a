#ifndef IPS_H
#define IPS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Values 0-5 match the exit codes of the `ips` binary.
 */
typedef enum IpsStatus {
  IPS_STATUS_OK = 0,
  /**
   * A verification ran and the predicate does not hold.
   */
  IPS_STATUS_FAIL = 1,
  /**
   * Malformed text input.
   */
  IPS_STATUS_PARSE = 2,
  /**
   * Dimension, contract, or parameter violation.
   */
  IPS_STATUS_VALIDATION = 3,
  IPS_STATUS_STRUCTURAL = 4,
  IPS_STATUS_NUMERIC = 5,
  /**
   * A required pointer argument was null.
   */
  IPS_STATUS_NULL_ARGUMENT = 6,
  /**
   * The library panicked; this is a bug.
   */
  IPS_STATUS_PANIC = 7,
} IpsStatus;

typedef enum IpsMode {
  IPS_MODE_NOISELESS = 0,
  IPS_MODE_UNITARILY_NOISELESS = 1,
} IpsMode;

typedef enum IpsVerifyMode {
  IPS_VERIFY_MODE_PRESERVED = 0,
  IPS_VERIFY_MODE_NOISELESS = 1,
  IPS_VERIFY_MODE_UNITARILY_NOISELESS = 2,
  IPS_VERIFY_MODE_CORRECTABLE = 3,
} IpsVerifyMode;

/**
 * Opaque channel handle.
 */
typedef struct IpsChannel IpsChannel;

/**
 * Opaque analysis result.
 */
typedef struct IpsReport IpsReport;

/**
 * Numerical thresholds; see [`ips_tolerance_default`].
 */
typedef struct IpsTolerance {
  double eig_cluster;
  double rank_cutoff;
  double verify;
} IpsTolerance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ips_version(void);

/**
 * Message for the most recent failure on this thread, or null.
 *
 * The pointer stays valid until the next library call on this thread.
 */
const char *ips_last_error_message(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be null or a pointer returned by this library and not yet freed.
 */
void ips_string_free(char *s);

struct IpsTolerance ips_tolerance_default(void);

/**
 * Build a channel from `count` Kraus operators of size `dim x dim`.
 *
 * `data` holds `count * dim * dim * 2` doubles: each operator row-major,
 * each entry as `(re, im)`.
 *
 * # Safety
 * `data` must point to that many readable doubles; `out` must be writable.
 */
enum IpsStatus ips_channel_from_kraus(size_t dim,
                                      size_t count,
                                      const double *data,
                                      const struct IpsTolerance *tol,
                                      struct IpsChannel **out);

/**
 * Parse a channel from the JSON format read by `ips analyze`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum IpsStatus ips_channel_from_json(const char *json,
                                     const struct IpsTolerance *tol,
                                     struct IpsChannel **out);

/**
 * # Safety
 * `ch` must be null or a handle from this library not yet freed.
 */
void ips_channel_free(struct IpsChannel *ch);

/**
 * Hilbert-space dimension, or 0 for a null handle.
 *
 * # Safety
 * `ch` must be null or a live handle.
 */
size_t ips_channel_dim(const struct IpsChannel *ch);

/**
 * Full structural analysis. `tol` may be null for defaults.
 *
 * # Safety
 * `ch` must be a live handle; `out` must be writable.
 */
enum IpsStatus ips_analyze(const struct IpsChannel *ch,
                           enum IpsMode mode,
                           const struct IpsTolerance *tol,
                           uint64_t seed,
                           struct IpsReport **out);

/**
 * # Safety
 * `r` must be null or a handle from this library not yet freed.
 */
void ips_report_free(struct IpsReport *r);

/**
 * Number of blocks `M_d (x) 1_n` in the recovered structure.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t ips_report_block_count(const struct IpsReport *r);

/**
 * Block `index` as `(d, n)`.
 *
 * # Safety
 * `r` must be a live handle; `d` and `n` must be writable.
 */
enum IpsStatus ips_report_block(const struct IpsReport *r, size_t index, size_t *d, size_t *n);

/**
 * Rank of the joint support of the fixed states.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t ips_report_support_rank(const struct IpsReport *r);

/**
 * Dimension of the fixed (or peripheral) state space.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t ips_report_fixed_dim(const struct IpsReport *r);

/**
 * The report as the JSON document `ips analyze` writes. Free with
 * [`ips_string_free`]. Returns null on a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
char *ips_report_to_json(const struct IpsReport *r);

/**
 * Check a code (JSON as read by `ips verify`) against a channel.
 *
 * Returns [`IpsStatus::Ok`] when the predicate holds and
 * [`IpsStatus::Fail`] when it does not; `worst_deviation` (nullable)
 * receives the largest sampled deviation.
 *
 * # Safety
 * `ch` must be a live handle and `code_json` a NUL-terminated string.
 */
enum IpsStatus ips_verify(const struct IpsChannel *ch,
                          const char *code_json,
                          enum IpsVerifyMode mode,
                          const struct IpsTolerance *tol,
                          uint64_t seed,
                          size_t trials,
                          double *worst_deviation);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IPS_H */
